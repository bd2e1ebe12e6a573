#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "plpdp/conditions.hpp"
#include "plpdp/core.hpp"
#include "plpdp/evaluation.hpp"
#include "plpdp/harness.hpp"
#include "plpdp/plp.hpp"

namespace plpdp::io {

inline constexpr const char* kActivationExtension = ".act.csv";
inline constexpr const char* kBeatsExtension = ".beats";

/// Activation file: optional "# fps=<int>" header, then one value per line.
/// The header overrides `default_fps`. Throws ParseError on malformed input.
NoveltyCurve parse_activation(std::istream& in, int default_fps = kDefaultFps);
NoveltyCurve read_activation(const std::filesystem::path& path, int default_fps = kDefaultFps);
void write_activation(std::ostream& out, const NoveltyCurve& curve);

/// Beat annotation: first whitespace-separated column is the time in seconds,
/// further columns are ignored, as are blank lines and lines starting with '#'.
/// Times must be nonnegative and strictly increasing.
std::vector<double> parse_annotation(std::istream& in);
std::vector<double> read_annotation(const std::filesystem::path& path);

/// One beat time per line, six decimals.
void write_beats(std::ostream& out, std::span<const double> beats_sec);

/// frame_time_sec plus one column per curve.
void write_plp_csv(std::ostream& out, std::span<const PlpCurve> curves);
/// frame_time_sec plus one magnitude column per tempo bin.
void write_tempogram_csv(std::ostream& out, const Tempogram& tempogram);
void write_condition_csv(std::ostream& out, const TempoCondition& condition);
void write_ibi_csv(std::ostream& out, std::span<const std::pair<double, double>> progression);
void write_stability_csv(std::ostream& out, const StabilityReport& report);

struct EvalRow {
    std::string track_id;
    std::string ppt;
    EvalReport report;
};
void write_eval_csv(std::ostream& out, std::span<const EvalRow> rows);

/// Regular files under `dir` (recursively) whose name ends in `extension`,
/// sorted by path.
std::vector<std::filesystem::path> list_corpus(const std::filesystem::path& dir, const std::string& extension);

/// File name without the corpus extension ("a/b.act.csv" -> "b").
std::string track_id(const std::filesystem::path& path, const std::string& extension);

}  // namespace plpdp::io
