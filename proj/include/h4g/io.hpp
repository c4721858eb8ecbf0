#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "h4g/inference.hpp"
#include "h4g/model.hpp"
#include "h4g/training.hpp"

namespace h4g {

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

// Model file "H4G-MODEL v1":
//   text header of `key value` lines (reals as hexadecimal floats), then a
//   manifest `tensor <name> <rows> <cols>` per parameter in layout order,
//   then `payload <count>` and count little-endian IEEE-754 doubles.
void write_model(std::ostream& out, const AlignmentModel& model);
/// Throws ParseError on malformed or truncated input.
AlignmentModel read_model(std::istream& in);
void save_model(const AlignmentModel& model, const std::string& path);
AlignmentModel load_model(const std::string& path);

/// CSV header: epoch,align_loss,reg_loss,total_loss,mean_radius_graph,
/// mean_radius_text,r_p5,r_p50,r_p95,svals_mean_g,svals_mean_t
void write_report_csv(std::ostream& out, const TrainReport& report);
/// One JSON object per epoch, one per line.
void write_report_jsonl(std::ostream& out, const TrainReport& report);

/// {"accuracy": x, "per_class": [...], "confusion": [[...]]}
std::string eval_json(const EvalResult& result);

/// Header "bin_lower,count".
void write_histogram_csv(std::ostream& out, const std::vector<HistogramBin>& bins);

}  // namespace h4g
