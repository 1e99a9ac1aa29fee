#pragma once

#include <map>
#include <string>
#include <vector>

#include "bayesdiff/dataset.hpp"
#include "bayesdiff/inference.hpp"
#include "bayesdiff/simulation.hpp"

namespace bayesdiff {

// Wide intensity CSV (rows = peptides; first column peptide id, optional
// second column "protein", remaining columns one per sample) plus a
// two-column sample->condition design CSV. Missing markers: empty cell,
// "NA", "NaN" (case-insensitive). Values must be finite reals; the model
// expects log-scale intensities and applies no transform.
std::map<std::string, GroupData> load_dataset(const std::string& data_path,
                                              const std::string& design_path);

// Long CSV: draw,peptide,value at 17 significant digits (lossless).
void write_samples(const DifferenceSamples& samples, const std::string& path);
DifferenceSamples read_samples(const std::string& path);

// peptide,mean,ci_lo,ci_hi,prob_positive,prob_exceeds_tau,flagged
void write_summary(const PosteriorSummary& summary, const std::string& path);

// Tidy plot data: normalized bin rows (area 1 per peptide) plus one interval
// row per peptide carrying the credible bounds.
void write_histogram(const DifferenceSamples& samples, int bins, double level,
                     const std::string& path);

void write_benchmark_csv(const std::vector<BenchmarkRow>& rows,
                         const std::string& path);
void write_benchmark_json(const std::vector<BenchmarkRow>& rows,
                          const std::string& path);
void write_timing_csv(const std::vector<TimingRow>& rows,
                      const std::string& path);

// FNV-1a 64 over the file bytes, hex; used in run manifests.
std::string file_digest_hex(const std::string& path);

}  // namespace bayesdiff
