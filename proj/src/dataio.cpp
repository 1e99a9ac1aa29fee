#include "bayesdiff/dataio.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "bayesdiff/errors.hpp"
#include "bayesdiff/rng.hpp"

namespace bayesdiff {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return char(std::tolower(c)); });
  return s;
}

bool is_missing_marker(const std::string& cell) {
  if (cell.empty()) return true;
  std::string l = lower(cell);
  return l == "na" || l == "nan";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    rows.push_back(split_csv_line(line));
  }
  if (rows.empty()) throw ParseError("'" + path + "' is empty");
  return rows;
}

double parse_value(const std::string& cell, const std::string& path,
                   std::size_t row, std::size_t col) {
  double v = 0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v))
    throw ParseError("'" + path + "' row " + std::to_string(row + 1) +
                     ", column " + std::to_string(col + 1) +
                     ": cannot parse '" + cell + "' as a finite number");
  return v;
}

void write_or_throw(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw Error("write failed for '" + path + "'");
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::map<std::string, GroupData> load_dataset(const std::string& data_path,
                                              const std::string& design_path) {
  auto data_rows = read_csv(data_path);
  auto design_rows = read_csv(design_path);

  // design: optional header, then sample,condition
  std::size_t start = 0;
  if (!design_rows.empty() && design_rows[0].size() >= 2 &&
      lower(design_rows[0][0]) == "sample" &&
      lower(design_rows[0][1]) == "condition")
    start = 1;
  std::unordered_map<std::string, std::string> condition_of;
  for (std::size_t i = start; i < design_rows.size(); ++i) {
    if (design_rows[i].size() != 2)
      throw ParseError("'" + design_path + "' row " + std::to_string(i + 1) +
                       ": expected sample,condition");
    if (!condition_of.emplace(design_rows[i][0], design_rows[i][1]).second)
      throw ParseError("'" + design_path + "': sample '" + design_rows[i][0] +
                       "' listed twice");
  }
  if (condition_of.empty())
    throw ParseError("'" + design_path + "' maps no samples");

  const auto& header = data_rows[0];
  if (header.size() < 2)
    throw ParseError("'" + data_path + "': header needs at least one sample column");
  bool has_protein = header.size() >= 2 && lower(header[1]) == "protein";
  std::size_t first_sample = has_protein ? 2 : 1;
  if (header.size() <= first_sample)
    throw ParseError("'" + data_path + "': no sample columns after id columns");

  std::vector<std::string> samples(header.begin() + long(first_sample), header.end());
  {
    std::unordered_set<std::string> seen;
    for (const auto& s : samples)
      if (!seen.insert(s).second)
        throw ParseError("'" + data_path + "': duplicate sample id '" + s + "'");
  }
  for (const auto& s : samples)
    if (!condition_of.count(s))
      throw ParseError("sample '" + s + "' has no condition in '" + design_path + "'");
  for (const auto& [s, c] : condition_of)
    if (std::find(samples.begin(), samples.end(), s) == samples.end())
      throw ParseError("design sample '" + s + "' is absent from '" + data_path + "'");

  const std::size_t n_pep = data_rows.size() - 1;
  std::vector<std::string> peptide_ids, protein_ids;
  Eigen::MatrixXd values(long(samples.size()), long(n_pep));
  BoolMask missing = BoolMask::Constant(long(samples.size()), long(n_pep), false);
  std::unordered_set<std::string> seen_pep;
  for (std::size_t i = 0; i < n_pep; ++i) {
    const auto& row = data_rows[i + 1];
    if (row.size() != header.size())
      throw ParseError("'" + data_path + "' row " + std::to_string(i + 2) +
                       ": expected " + std::to_string(header.size()) +
                       " cells, found " + std::to_string(row.size()));
    if (!seen_pep.insert(row[0]).second)
      throw ParseError("'" + data_path + "': duplicate peptide id '" + row[0] + "'");
    peptide_ids.push_back(row[0]);
    if (has_protein) protein_ids.push_back(row[1]);
    for (std::size_t s = 0; s < samples.size(); ++s) {
      const std::string& cell = row[first_sample + s];
      if (is_missing_marker(cell)) {
        missing(long(s), long(i)) = true;
        values(long(s), long(i)) = std::numeric_limits<double>::quiet_NaN();
      } else {
        values(long(s), long(i)) = parse_value(cell, data_path, i + 1, first_sample + s);
      }
    }
  }

  // conditions in order of first appearance in the header
  std::vector<std::string> cond_order;
  for (const auto& s : samples) {
    const std::string& c = condition_of[s];
    if (std::find(cond_order.begin(), cond_order.end(), c) == cond_order.end())
      cond_order.push_back(c);
  }

  std::map<std::string, GroupData> out;
  for (const auto& cond : cond_order) {
    std::vector<std::size_t> rows;
    for (std::size_t s = 0; s < samples.size(); ++s)
      if (condition_of[samples[s]] == cond) rows.push_back(s);
    GroupData g;
    g.group_id = cond;
    g.peptide_ids = peptide_ids;
    g.protein_ids = protein_ids;
    g.values.resize(long(rows.size()), long(n_pep));
    g.missing.resize(long(rows.size()), long(n_pep));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      g.values.row(long(r)) = values.row(long(rows[r]));
      g.missing.row(long(r)) = missing.row(long(rows[r]));
    }
    g.validate();
    out.emplace(cond, std::move(g));
  }
  return out;
}

void write_samples(const DifferenceSamples& samples, const std::string& path) {
  std::ostringstream out;
  out << "draw,peptide,value\n";
  for (Eigen::Index r = 0; r < samples.draws.rows(); ++r)
    for (Eigen::Index j = 0; j < samples.draws.cols(); ++j)
      out << r << ',' << samples.peptide_ids[std::size_t(j)] << ','
          << fmt17(samples.draws(r, j)) << '\n';
  write_or_throw(path, out.str());
}

DifferenceSamples read_samples(const std::string& path) {
  auto rows = read_csv(path);
  if (rows[0] != std::vector<std::string>{"draw", "peptide", "value"})
    throw ParseError("'" + path + "': unexpected header");
  DifferenceSamples s;
  std::unordered_map<std::string, Eigen::Index> col_of;
  Eigen::Index max_draw = -1;
  std::vector<std::tuple<Eigen::Index, Eigen::Index, double>> cells;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].size() != 3)
      throw ParseError("'" + path + "' row " + std::to_string(i + 1) +
                       ": expected draw,peptide,value");
    Eigen::Index draw = Eigen::Index(parse_value(rows[i][0], path, i, 0));
    auto [it, inserted] =
        col_of.emplace(rows[i][1], Eigen::Index(col_of.size()));
    if (inserted) s.peptide_ids.push_back(rows[i][1]);
    cells.emplace_back(draw, it->second, parse_value(rows[i][2], path, i, 2));
    max_draw = std::max(max_draw, draw);
  }
  s.r = int(max_draw + 1);
  s.draws.resize(max_draw + 1, Eigen::Index(s.peptide_ids.size()));
  for (const auto& [r, c, v] : cells) s.draws(r, c) = v;
  return s;
}

void write_summary(const PosteriorSummary& summary, const std::string& path) {
  std::ostringstream out;
  out << "peptide,mean,ci_lo,ci_hi,prob_positive,prob_exceeds_tau,flagged\n";
  for (const auto& row : summary.rows)
    out << row.peptide_id << ',' << fmt17(row.mean) << ',' << fmt17(row.lo)
        << ',' << fmt17(row.hi) << ',' << fmt17(row.prob_positive) << ','
        << fmt17(row.prob_exceeds_tau) << ',' << (row.flagged ? 1 : 0) << '\n';
  write_or_throw(path, out.str());
}

void write_histogram(const DifferenceSamples& samples, int bins, double level,
                     const std::string& path) {
  if (bins < 2) throw InvalidInput("bins must be >= 2");
  PosteriorSummary sum = summarize(samples, level, 0.0);
  std::ostringstream out;
  out << "peptide,kind,x0,x1,y\n";
  const Eigen::Index r = samples.draws.rows();
  for (Eigen::Index j = 0; j < samples.draws.cols(); ++j) {
    const std::string& id = samples.peptide_ids[std::size_t(j)];
    double lo = samples.draws.col(j).minCoeff();
    double hi = samples.draws.col(j).maxCoeff();
    if (lo == hi) {
      out << id << ",bin," << fmt17(lo) << ',' << fmt17(hi) << ",0\n";
    } else {
      double w = (hi - lo) / bins;
      std::vector<Eigen::Index> counts(std::size_t(bins), 0);
      for (Eigen::Index i = 0; i < r; ++i) {
        double v = samples.draws(i, j);
        auto b = std::min<Eigen::Index>(Eigen::Index((v - lo) / w), bins - 1);
        ++counts[std::size_t(b)];
      }
      for (int b = 0; b < bins; ++b)
        out << id << ",bin," << fmt17(lo + b * w) << ',' << fmt17(lo + (b + 1) * w)
            << ',' << fmt17(double(counts[std::size_t(b)]) / (double(r) * w))
            << '\n';
    }
    const auto& row = sum.rows[std::size_t(j)];
    out << id << ",interval," << fmt17(row.lo) << ',' << fmt17(row.hi) << ','
        << fmt17(level) << '\n';
  }
  write_or_throw(path, out.str());
}

namespace {
const char* kBenchHeader =
    "label,reps,mean_diff_mean,mean_diff_sd,width_mean,width_sd,"
    "welch_p_mean,welch_p_sd,rmse,abs_err_sd,cic95,cic95_sd";
}

void write_benchmark_csv(const std::vector<BenchmarkRow>& rows,
                         const std::string& path) {
  std::ostringstream out;
  out << kBenchHeader << '\n';
  for (const auto& r : rows)
    out << r.label << ',' << r.reps << ',' << fmt17(r.mean_diff_mean) << ','
        << fmt17(r.mean_diff_sd) << ',' << fmt17(r.width_mean) << ','
        << fmt17(r.width_sd) << ',' << fmt17(r.p_mean) << ',' << fmt17(r.p_sd)
        << ',' << fmt17(r.rmse) << ',' << fmt17(r.abs_err_sd) << ','
        << fmt17(r.cic) << ',' << fmt17(r.cic_sd) << '\n';
  write_or_throw(path, out.str());
}

void write_benchmark_json(const std::vector<BenchmarkRow>& rows,
                          const std::string& path) {
  std::ostringstream out;
  out << "[\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    out << "  {\"label\": \"" << r.label << "\", \"reps\": " << r.reps
        << ", \"mean_diff\": {\"mean\": " << fmt17(r.mean_diff_mean)
        << ", \"sd\": " << fmt17(r.mean_diff_sd)
        << "}, \"width\": {\"mean\": " << fmt17(r.width_mean)
        << ", \"sd\": " << fmt17(r.width_sd)
        << "}, \"welch_p\": {\"mean\": " << fmt17(r.p_mean)
        << ", \"sd\": " << fmt17(r.p_sd) << "}, \"rmse\": " << fmt17(r.rmse)
        << ", \"abs_err_sd\": " << fmt17(r.abs_err_sd)
        << ", \"cic95\": " << fmt17(r.cic) << ", \"cic95_sd\": "
        << fmt17(r.cic_sd) << "}" << (i + 1 < rows.size() ? "," : "") << "\n";
  }
  out << "]\n";
  write_or_throw(path, out.str());
}

void write_timing_csv(const std::vector<TimingRow>& rows,
                      const std::string& path) {
  std::ostringstream out;
  out << "engine,peptides,seconds\n";
  for (const auto& r : rows)
    out << r.engine << ',' << r.peptides << ',' << fmt17(r.seconds) << '\n';
  write_or_throw(path, out.str());
}

std::string file_digest_hex(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "' for digest");
  uint64_t h = 0xCBF29CE484222325ull;
  char buf[8192];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= uint8_t(buf[i]);
      h *= 0x100000001B3ull;
    }
    if (in.eof()) break;
  }
  char hex[20];
  std::snprintf(hex, sizeof(hex), "%016llx", (unsigned long long)h);
  return hex;
}

}  // namespace bayesdiff
