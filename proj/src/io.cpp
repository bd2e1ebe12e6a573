#include "plpdp/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace plpdp::io {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& token, double& value) {
    const char* first = token.data();
    const char* last = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    return ec == std::errc{} && ptr == last;
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open " + path.string());
    }
    return in;
}

std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

}  // namespace

NoveltyCurve parse_activation(std::istream& in, int default_fps) {
    int fps = default_fps;
    std::vector<double> values;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto t = trim(line);
        if (t.empty()) {
            continue;
        }
        if (t.front() == '#') {
            const auto pos = t.find("fps=");
            if (pos != std::string::npos) {
                const auto digits = trim(t.substr(pos + 4));
                int parsed = 0;
                auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), parsed);
                if (ec != std::errc{} || ptr != digits.data() + digits.size() || parsed <= 0) {
                    throw ParseError("line " + std::to_string(line_no) + ": bad fps header");
                }
                fps = parsed;
            }
            continue;
        }
        // tolerate a trailing comma-separated remainder ("value,..." CSV rows)
        const auto field = trim(t.substr(0, t.find(',')));
        double v = 0.0;
        if (!parse_double(field, v)) {
            throw ParseError("line " + std::to_string(line_no) + ": not a number: '" + field + "'");
        }
        values.push_back(v);
    }
    if (fps <= 0) {
        throw ParseError("fps must be positive");
    }
    return validate_novelty(values, fps);
}

NoveltyCurve read_activation(const std::filesystem::path& path, int default_fps) {
    auto in = open_input(path);
    try {
        return parse_activation(in, default_fps);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

void write_activation(std::ostream& out, const NoveltyCurve& curve) {
    out << "# fps=" << curve.grid().fps() << '\n';
    for (double v : curve.values()) {
        out << fmt("%.9g", v) << '\n';
    }
}

std::vector<double> parse_annotation(std::istream& in) {
    std::vector<double> beats;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto t = trim(line);
        if (t.empty() || t.front() == '#') {
            continue;
        }
        std::istringstream fields(t);
        std::string first;
        fields >> first;
        double v = 0.0;
        if (!parse_double(first, v) || !std::isfinite(v)) {
            throw ParseError("line " + std::to_string(line_no) + ": not a beat time: '" + first + "'");
        }
        if (v < 0.0) {
            throw ParseError("line " + std::to_string(line_no) + ": negative beat time");
        }
        if (!beats.empty() && v <= beats.back()) {
            throw ParseError("line " + std::to_string(line_no) + ": beat times must be strictly increasing");
        }
        beats.push_back(v);
    }
    return beats;
}

std::vector<double> read_annotation(const std::filesystem::path& path) {
    auto in = open_input(path);
    try {
        return parse_annotation(in);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

void write_beats(std::ostream& out, std::span<const double> beats_sec) {
    for (double t : beats_sec) {
        out << fmt("%.6f", t) << '\n';
    }
}

void write_plp_csv(std::ostream& out, std::span<const PlpCurve> curves) {
    if (curves.empty()) {
        return;
    }
    out << "frame_time_sec";
    for (const auto& c : curves) {
        out << ",plp_" << c.kernel_tag();
    }
    out << '\n';
    const auto& grid = curves.front().grid();
    for (Frame n = 0; n < grid.size(); ++n) {
        out << fmt("%.2f", grid.seconds(n));
        for (const auto& c : curves) {
            out << ',' << fmt("%.9g", c[n]);
        }
        out << '\n';
    }
}

void write_tempogram_csv(std::ostream& out, const Tempogram& tempogram) {
    out << "frame_time_sec";
    for (double t : tempogram.tempi()) {
        out << ",bpm_" << fmt("%g", t);
    }
    out << '\n';
    for (std::size_t j = 0; j < tempogram.n_frames(); ++j) {
        out << fmt("%.2f", tempogram.grid().seconds(tempogram.centers()[j]));
        for (const auto& c : tempogram.row(j)) {
            out << ',' << fmt("%.9g", std::abs(c));
        }
        out << '\n';
    }
}

void write_condition_csv(std::ostream& out, const TempoCondition& condition) {
    out << "frame_time_sec,confidence,est_ibi_sec\n";
    const auto& grid = condition.grid();
    for (Frame n = 0; n < grid.size(); ++n) {
        out << fmt("%.2f", grid.seconds(n)) << ',' << fmt("%.9g", condition.confidence()[n]) << ','
            << fmt("%.6f", condition.est_ibi_frames()[n] / grid.fps()) << '\n';
    }
}

void write_ibi_csv(std::ostream& out, std::span<const std::pair<double, double>> progression) {
    out << "time_sec,ibi_sec\n";
    for (const auto& [t, ibi] : progression) {
        out << fmt("%.6f", t) << ',' << fmt("%.6f", ibi) << '\n';
    }
}

void write_stability_csv(std::ostream& out, const StabilityReport& report) {
    out << "track_id,stable\n";
    for (std::size_t i = 0; i < report.track_ids.size(); ++i) {
        out << report.track_ids[i] << ',' << (report.results[i].stable ? 1 : 0) << '\n';
    }
}

void write_eval_csv(std::ostream& out, std::span<const EvalRow> rows) {
    out << "track_id,ppt,f1,p,r\n";
    for (const auto& row : rows) {
        out << row.track_id << ',' << row.ppt << ',' << fmt("%.6f", row.report.f1) << ','
            << fmt("%.6f", row.report.precision) << ',' << fmt("%.6f", row.report.recall) << '\n';
    }
}

std::vector<std::filesystem::path> list_corpus(const std::filesystem::path& dir, const std::string& extension) {
    std::vector<std::filesystem::path> out;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(dir)) {
        if (!entry.is_regular_file()) {
            continue;
        }
        const auto name = entry.path().filename().string();
        if (name.size() > extension.size() &&
            name.compare(name.size() - extension.size(), extension.size(), extension) == 0) {
            out.push_back(entry.path());
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::string track_id(const std::filesystem::path& path, const std::string& extension) {
    auto name = path.filename().string();
    if (name.size() > extension.size() &&
        name.compare(name.size() - extension.size(), extension.size(), extension) == 0) {
        name.resize(name.size() - extension.size());
    }
    return name;
}

}  // namespace plpdp::io
