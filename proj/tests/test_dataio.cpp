#include <doctest.h>

#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "bayesdiff/dataio.hpp"
#include "bayesdiff/errors.hpp"
#include "bayesdiff/rng.hpp"
#include "helpers.hpp"

namespace fs = std::filesystem;
using bayesdiff::DifferenceSamples;
using bayesdiff::GroupData;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("bayesdiff-test-" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

void put(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

const char* kDesign =
    "sample,condition\n"
    "s1,ctrl\ns2,ctrl\ns3,ctrl\ns4,treat\ns5,treat\ns6,treat\n";

std::string wide_data(bool proteins) {
  std::string head = proteins ? "peptide,protein,s1,s2,s3,s4,s5,s6\n"
                              : "peptide,s1,s2,s3,s4,s5,s6\n";
  std::string body;
  for (int i = 1; i <= 9; ++i) {
    body += "pep" + std::to_string(i);
    if (proteins) body += ",prot" + std::to_string((i - 1) / 3 + 1);
    for (int s = 1; s <= 6; ++s)
      body += "," + std::to_string(double(i) + 0.1 * s);
    body += "\n";
  }
  return head + body;
}

}  // namespace

TEST_CASE("loading a wide dataset splits samples by condition") {
  TempDir tmp;
  put(tmp.file("design.csv"), kDesign);
  put(tmp.file("data.csv"), wide_data(false));

  auto groups = bayesdiff::load_dataset(tmp.file("data.csv"),
                                        tmp.file("design.csv"));
  REQUIRE(groups.size() == 2);
  REQUIRE(groups.count("ctrl") == 1);
  REQUIRE(groups.count("treat") == 1);

  const GroupData& ctrl = groups.at("ctrl");
  const GroupData& treat = groups.at("treat");
  CHECK(ctrl.n() == 3);
  CHECK(ctrl.p() == 9);
  CHECK(treat.n() == 3);
  CHECK(ctrl.peptide_ids[0] == "pep1");
  CHECK(ctrl.peptide_ids[8] == "pep9");
  CHECK_FALSE(ctrl.has_proteins());

  // pep3, sample s2 (ctrl row 2) = 3 + 0.2; s5 lands in treat row 2.
  CHECK(ctrl.values(1, 2) == 3.2);
  CHECK(treat.values(1, 2) == 3.5);
  CHECK(ctrl.missing.count() == 0);
}

TEST_CASE("the optional protein column is carried through") {
  TempDir tmp;
  put(tmp.file("design.csv"), kDesign);
  put(tmp.file("data.csv"), wide_data(true));
  auto groups = bayesdiff::load_dataset(tmp.file("data.csv"),
                                        tmp.file("design.csv"));
  const GroupData& ctrl = groups.at("ctrl");
  REQUIRE(ctrl.has_proteins());
  CHECK(ctrl.protein_ids[0] == "prot1");
  CHECK(ctrl.protein_ids[3] == "prot2");
  CHECK(ctrl.protein_ids[8] == "prot3");
}

TEST_CASE("missing markers are masked; junk markers are rejected") {
  TempDir tmp;
  put(tmp.file("design.csv"), "sample,condition\ns1,a\ns2,a\ns3,b\ns4,b\n");
  put(tmp.file("data.csv"),
      "peptide,s1,s2,s3,s4\n"
      "p1,1.0,,2.0,NA\n"
      "p2,nan,NaN,3.5,4.5\n");
  auto groups = bayesdiff::load_dataset(tmp.file("data.csv"),
                                        tmp.file("design.csv"));
  const GroupData& a = groups.at("a");
  const GroupData& b = groups.at("b");
  CHECK(a.missing(1, 0));                 // s2 empty
  CHECK(b.missing(1, 0));                 // s4 NA
  CHECK(a.missing(0, 1));                 // s1 nan
  CHECK(a.missing(1, 1));                 // s2 NaN
  CHECK(std::isnan(a.values(1, 0)));
  CHECK(a.values(0, 0) == 1.0);
  CHECK(b.values(0, 1) == 3.5);

  put(tmp.file("bad.csv"), "peptide,s1,s2,s3,s4\np1,1.0,n/a,2.0,3.0\n");
  CHECK_THROWS_AS(
      bayesdiff::load_dataset(tmp.file("bad.csv"), tmp.file("design.csv")),
      bayesdiff::ParseError);
}

TEST_CASE("structural problems are reported with their location") {
  TempDir tmp;
  const std::string design = tmp.file("design.csv");
  put(design, "sample,condition\ns1,a\ns2,b\n");

  put(tmp.file("dup_pep.csv"), "peptide,s1,s2\np1,1,2\np1,3,4\n");
  CHECK_THROWS_WITH_AS(
      bayesdiff::load_dataset(tmp.file("dup_pep.csv"), design),
      doctest::Contains("p1"), bayesdiff::ParseError);

  put(tmp.file("dup_sample.csv"), "peptide,s1,s1\np1,1,2\n");
  CHECK_THROWS_WITH_AS(
      bayesdiff::load_dataset(tmp.file("dup_sample.csv"), design),
      doctest::Contains("s1"), bayesdiff::ParseError);

  put(tmp.file("unknown_sample.csv"), "peptide,s1,s9\np1,1,2\n");
  CHECK_THROWS_WITH_AS(
      bayesdiff::load_dataset(tmp.file("unknown_sample.csv"), design),
      doctest::Contains("s9"), bayesdiff::InvalidInput);

  put(tmp.file("missing_sample.csv"), "peptide,s1\np1,1\n");
  CHECK_THROWS_WITH_AS(
      bayesdiff::load_dataset(tmp.file("missing_sample.csv"), design),
      doctest::Contains("s2"), bayesdiff::InvalidInput);

  put(tmp.file("ragged.csv"), "peptide,s1,s2\np1,1,2\np2,3\n");
  CHECK_THROWS_WITH_AS(bayesdiff::load_dataset(tmp.file("ragged.csv"), design),
                       doctest::Contains("row 3"), bayesdiff::ParseError);

  put(tmp.file("badnum.csv"), "peptide,s1,s2\np1,1,2x\n");
  CHECK_THROWS_WITH_AS(bayesdiff::load_dataset(tmp.file("badnum.csv"), design),
                       doctest::Contains("column 3"), bayesdiff::ParseError);

  put(tmp.file("dup_design.csv"), "sample,condition\ns1,a\ns1,b\n");
  CHECK_THROWS_AS(
      bayesdiff::load_dataset(tmp.file("dup_pep.csv"),
                              tmp.file("dup_design.csv")),
      bayesdiff::ParseError);

  CHECK_THROWS_AS(
      bayesdiff::load_dataset(tmp.file("does_not_exist.csv"), design),
      bayesdiff::ParseError);
}

TEST_CASE("CRLF input parses the same as LF") {
  TempDir tmp;
  put(tmp.file("design.csv"), "sample,condition\r\ns1,a\r\ns2,b\r\n");
  put(tmp.file("data.csv"), "peptide,s1,s2\r\np1,1.5,2.5\r\n");
  auto groups = bayesdiff::load_dataset(tmp.file("data.csv"),
                                        tmp.file("design.csv"));
  CHECK(groups.at("a").values(0, 0) == 1.5);
  CHECK(groups.at("b").values(0, 0) == 2.5);
}

TEST_CASE("draw matrices survive a write/read round trip bitwise") {
  TempDir tmp;
  DifferenceSamples s;
  s.peptide_ids = {"alpha", "beta"};
  s.r = 5;
  s.draws.resize(5, 2);
  s.draws.col(0) << 1.0 / 3.0, std::sqrt(2.0), 5e-324, 6.02e23, -0.0;
  s.draws.col(1) << -1.0 / 7.0, 2.718281828459045, -5e300, 1e-300, 42.0;

  const std::string path = tmp.file("draws.csv");
  bayesdiff::write_samples(s, path);
  DifferenceSamples back = bayesdiff::read_samples(path);
  REQUIRE(back.peptide_ids == s.peptide_ids);
  REQUIRE(back.draws.rows() == 5);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 2; ++j) {
      CHECK(back.draws(i, j) == s.draws(i, j));
    }
}

TEST_CASE("summary CSV is stable down to the byte") {
  TempDir tmp;
  bayesdiff::PosteriorSummary sum;
  sum.level = 0.95;
  sum.tau = 0.0;
  bayesdiff::PeptideSummary row;
  row.peptide_id = "pep1";
  row.mean = 1.5;
  row.lo = 0.25;
  row.hi = 2.75;
  row.prob_positive = 0.984375;
  row.prob_exceeds_tau = 1.0;
  row.flagged = true;
  sum.rows.push_back(row);
  row.peptide_id = "pep2";
  row.mean = -0.125;
  row.lo = -1.5;
  row.hi = 1.25;
  row.prob_positive = 0.4375;
  row.prob_exceeds_tau = 1.0;
  row.flagged = false;
  sum.rows.push_back(row);

  const std::string path = tmp.file("summary.csv");
  bayesdiff::write_summary(sum, path);
  CHECK(slurp(path) ==
        "peptide,mean,ci_lo,ci_hi,prob_positive,prob_exceeds_tau,flagged\n"
        "pep1,1.5,0.25,2.75,0.984375,1,1\n"
        "pep2,-0.125,-1.5,1.25,0.4375,1,0\n");
}

TEST_CASE("histogram rows integrate to one and track the density") {
  TempDir tmp;
  bayesdiff::RngStream rng(601);

  DifferenceSamples s;
  s.peptide_ids = {"u"};
  const int r = 10000;
  s.r = r;
  s.draws.resize(r, 1);
  for (int i = 0; i < r; ++i) s.draws(i, 0) = rng.uniform01();

  const std::string path = tmp.file("hist.csv");
  bayesdiff::write_histogram(s, 20, 0.95, path);

  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK_MESSAGE(testutil::contains(line, "kind"), line);
  double area = 0;
  int bin_rows = 0, interval_rows = 0;
  while (std::getline(in, line)) {
    std::vector<std::string> f;
    std::size_t pos = 0;
    while (true) {
      std::size_t c = line.find(',', pos);
      f.push_back(line.substr(pos, c - pos));
      if (c == std::string::npos) break;
      pos = c + 1;
    }
    REQUIRE(f.size() >= 5);
    if (f[1] == "bin") {
      ++bin_rows;
      double lo = std::stod(f[2]), hi = std::stod(f[3]), y = std::stod(f[4]);
      area += y * (hi - lo);
      CHECK(y > 0.8);   // uniform density is 1
      CHECK(y < 1.2);
    } else if (f[1] == "interval") {
      ++interval_rows;
    }
  }
  CHECK(bin_rows == 20);
  CHECK(interval_rows == 1);
  CHECK(area == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("the histogram peak matches the known mode density") {
  TempDir tmp;
  bayesdiff::RngStream rng(602);
  bayesdiff::ScaledTDist t{5.0, 1.5, 0.25};

  DifferenceSamples s;
  s.peptide_ids = {"pep"};
  const int r = 1000000;
  s.r = r;
  s.draws.resize(r, 1);
  auto draws = bayesdiff::sample_scaled_t(t, rng, std::size_t(r));
  for (int i = 0; i < r; ++i) s.draws(i, 0) = draws[std::size_t(i)];

  const std::string path = tmp.file("hist.csv");
  bayesdiff::write_histogram(s, 200, 0.95, path);

  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  double peak = 0;
  while (std::getline(in, line)) {
    if (line.find(",bin,") == std::string::npos) continue;
    std::size_t last = line.rfind(',');
    std::size_t prev = line.rfind(',', last - 1);
    (void)prev;
    // columns: peptide,kind,lo,hi,y[,level]; y is the 5th field
    std::vector<std::string> f;
    std::size_t pos = 0;
    while (true) {
      std::size_t c = line.find(',', pos);
      f.push_back(line.substr(pos, c - pos));
      if (c == std::string::npos) break;
      pos = c + 1;
    }
    peak = std::max(peak, std::stod(f[4]));
  }
  // Density of the marginal at its mode, 1.5.
  CHECK(peak == doctest::Approx(0.7592133796449888).epsilon(0.02));
}

TEST_CASE("benchmark and timing writers emit one row per entry") {
  TempDir tmp;
  bayesdiff::BenchmarkRow r1;
  r1.label = "t2r1";
  r1.reps = 10;
  r1.mean_diff_mean = 1.01;
  r1.cic = 95.0;
  bayesdiff::BenchmarkRow r2;
  r2.label = "t2r2";
  r2.reps = 10;

  bayesdiff::write_benchmark_csv({r1, r2}, tmp.file("bench.csv"));
  std::string csv = slurp(tmp.file("bench.csv"));
  CHECK_MESSAGE(testutil::contains(csv, "label,reps,"), csv);
  CHECK_MESSAGE(testutil::contains(csv, "t2r1,10,"), csv);
  CHECK_MESSAGE(testutil::contains(csv, "t2r2,10,"), csv);

  bayesdiff::write_benchmark_json({r1, r2}, tmp.file("bench.json"));
  std::string js = slurp(tmp.file("bench.json"));
  CHECK_MESSAGE(testutil::contains(js, "\"label\": \"t2r1\""), js);
  CHECK_MESSAGE(testutil::contains(js, "\"cic95\": 95"), js);

  bayesdiff::write_timing_csv({{"univariate", 100, 0.25}},
                              tmp.file("timing.csv"));
  CHECK(slurp(tmp.file("timing.csv")) ==
        "engine,peptides,seconds\nunivariate,100,0.25\n");
}

TEST_CASE("file digests are stable and content-sensitive") {
  TempDir tmp;
  put(tmp.file("a.txt"), "hello");
  put(tmp.file("b.txt"), "hello");
  put(tmp.file("c.txt"), "hellp");
  const std::string da = bayesdiff::file_digest_hex(tmp.file("a.txt"));
  CHECK(da == bayesdiff::file_digest_hex(tmp.file("b.txt")));
  CHECK(da != bayesdiff::file_digest_hex(tmp.file("c.txt")));
  CHECK(da.size() == 16);
  // FNV-1a 64 of "hello".
  CHECK(da == "a430d84680aabd0b");
}
