// plpdp: beat tracking post-processing from frame-rate activation functions.
//
// Exit codes: 0 success, 1 unreadable or malformed input, 2 invalid parameters.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "plpdp/conditions.hpp"
#include "plpdp/core.hpp"
#include "plpdp/harness.hpp"
#include "plpdp/io.hpp"
#include "plpdp/plp.hpp"
#include "plpdp/trackers.hpp"

namespace fs = std::filesystem;
using namespace plpdp;

namespace {

constexpr int kExitParse = 1;
constexpr int kExitParams = 2;

struct Settings {
    std::string ppt = "plpdp";
    int fps = kDefaultFps;
    double epsilon = kDefaultEpsilon;
    double tolerance = kDefaultToleranceSec;
    std::string kernels = "1,3,5";
    int min_bpm = 30;
    int max_bpm = 300;
    double lambda0 = 100.0;
    std::string lambda_trans;  // single value for track, list for gridsearch
    std::string ibi_from_ref;
    double harmonic_tie = kDefaultHarmonicTieTolerance;
    bool exact_dp = false;
    std::string out;
    std::uint64_t seed = 0;
    unsigned threads = 0;
};

std::vector<double> parse_list(const std::string& text, const char* what) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) {
            continue;
        }
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) {
                throw std::invalid_argument(item);
            }
        } catch (const std::exception&) {
            throw ConfigError(std::string("bad ") + what + " value '" + item + "'");
        }
    }
    if (out.empty()) {
        throw ConfigError(std::string("empty ") + what + " list");
    }
    return out;
}

TempoRange tempo_range(const Settings& s) {
    TempoRange r{s.min_bpm, s.max_bpm};
    r.validate();
    return r;
}

PptOptions ppt_options(const Settings& s) {
    PptOptions opts;
    opts.lambda0 = s.lambda0;
    opts.exact_dp = s.exact_dp;
    opts.kernel_sizes_sec = parse_list(s.kernels, "kernel");
    opts.tempo_range = tempo_range(s);
    opts.hmm.tempo_range = opts.tempo_range;
    opts.harmonic_tie_tolerance = s.harmonic_tie;
    if (!s.lambda_trans.empty()) {
        const auto l = parse_list(s.lambda_trans, "lambda-trans");
        if (l.size() != 1) {
            throw ConfigError("--lambda-trans takes a single value here");
        }
        opts.hmm.lambda_trans = l.front();
    }
    if (!(opts.lambda0 >= 0.0) || !(opts.hmm.lambda_trans >= 0.0)) {
        throw ConfigError("lambda values must be nonnegative");
    }
    for (double k : opts.kernel_sizes_sec) {
        kernel_config(k, opts.tempo_range, s.harmonic_tie).validate(s.fps);
    }
    return opts;
}

std::ofstream open_output(const fs::path& path) {
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    std::ofstream out(path);
    if (!out) {
        throw ConfigError("cannot write " + path.string());
    }
    return out;
}

/// Writes through `fn` to --out, or stdout when --out is empty.
template <class Fn>
void emit(const std::string& out_path, Fn&& fn) {
    if (out_path.empty() || out_path == "-") {
        fn(std::cout);
    } else {
        auto out = open_output(out_path);
        fn(out);
    }
}

std::vector<std::pair<std::string, std::vector<double>>> read_annotation_corpus(const fs::path& path) {
    std::vector<std::pair<std::string, std::vector<double>>> refs;
    if (fs::is_directory(path)) {
        for (const auto& p : io::list_corpus(path, io::kBeatsExtension)) {
            refs.emplace_back(io::track_id(p, io::kBeatsExtension), io::read_annotation(p));
        }
    } else {
        refs.emplace_back(io::track_id(path, io::kBeatsExtension), io::read_annotation(path));
    }
    return refs;
}

void require_exists(const std::string& path) {
    if (!fs::exists(path)) {
        throw ParseError("no such file or directory: " + path);
    }
}

// ---------------------------------------------------------------------------

int cmd_track(const Settings& s, const std::string& input) {
    require_exists(input);
    const Ppt ppt = parse_ppt(s.ppt);
    const auto opts = ppt_options(s);

    const auto track_one = [&](const NoveltyCurve& act, const std::optional<fs::path>& ref) {
        PptOptions local = opts;
        if (ppt == Ppt::dp && ref) {
            local.dp_delta0_frames = mean_ibi_frames(io::read_annotation(*ref), act.grid().fps());
        }
        return run_ppt(ppt, act, local).seconds();
    };

    if (!fs::is_directory(input)) {
        const auto act = io::read_activation(input, s.fps);
        std::optional<fs::path> ref;
        if (!s.ibi_from_ref.empty()) {
            require_exists(s.ibi_from_ref);
            ref = s.ibi_from_ref;
        }
        const auto beats = track_one(act, ref);
        emit(s.out, [&](std::ostream& os) { io::write_beats(os, beats); });
        return 0;
    }

    if (s.out.empty()) {
        throw ConfigError("corpus mode needs --out <directory>");
    }
    const auto files = io::list_corpus(input, io::kActivationExtension);
    std::vector<NoveltyCurve> acts;
    std::vector<std::optional<fs::path>> refs;
    for (const auto& f : files) {
        acts.push_back(io::read_activation(f, s.fps));
        std::optional<fs::path> ref;
        if (!s.ibi_from_ref.empty()) {
            ref = fs::path(s.ibi_from_ref) / (io::track_id(f, io::kActivationExtension) + io::kBeatsExtension);
            require_exists(ref->string());
        }
        refs.push_back(ref);
    }
    std::vector<std::vector<double>> results(files.size());
    parallel_for(files.size(), [&](std::size_t i) { results[i] = track_one(acts[i], refs[i]); }, s.threads);
    for (std::size_t i = 0; i < files.size(); ++i) {
        auto out = open_output(fs::path(s.out) / (io::track_id(files[i], io::kActivationExtension) + io::kBeatsExtension));
        io::write_beats(out, results[i]);
    }
    std::cerr << "tracked " << files.size() << " activation files with " << s.ppt << '\n';
    return 0;
}

int cmd_synth(const Settings& s, const std::string& input, std::size_t corpus_size, double duration) {
    if (!(s.epsilon > 0.0 && s.epsilon < 0.5)) {
        throw ConfigError("--epsilon must lie in (0, 0.5)");
    }
    if (corpus_size > 0) {
        if (s.out.empty()) {
            throw ConfigError("--corpus needs --out <directory>");
        }
        CorpusSpec spec;
        spec.n_tracks = corpus_size;
        spec.duration_sec = duration;
        spec.seed = s.seed;
        spec.fps = s.fps;
        spec.epsilon = s.epsilon;
        for (const auto& track : synth_corpus(spec)) {
            auto beats = open_output(fs::path(s.out) / (track.id + io::kBeatsExtension));
            io::write_beats(beats, track.reference_sec);
            auto act = open_output(fs::path(s.out) / (track.id + io::kActivationExtension));
            io::write_activation(act, track.activation);
        }
        std::cerr << "wrote " << corpus_size << " synthetic tracks to " << s.out << '\n';
        return 0;
    }
    if (input.empty()) {
        throw ConfigError("synth needs an annotation path or --corpus N");
    }
    require_exists(input);
    if (fs::is_directory(input)) {
        if (s.out.empty()) {
            throw ConfigError("corpus mode needs --out <directory>");
        }
        for (const auto& [id, ref] : read_annotation_corpus(input)) {
            auto out = open_output(fs::path(s.out) / (id + io::kActivationExtension));
            io::write_activation(out, synth_activation(ref, s.fps, s.epsilon));
        }
        return 0;
    }
    const auto ref = io::read_annotation(input);
    const auto act = synth_activation(ref, s.fps, s.epsilon);
    emit(s.out, [&](std::ostream& os) { io::write_activation(os, act); });
    return 0;
}

void print_summary(const std::string& label, const EvalReport& r) {
    std::printf("%-10s F1 %.3f  P %.3f  R %.3f\n", label.c_str(), r.f1, r.precision, r.recall);
}

int cmd_eval(const Settings& s, const std::string& est, const std::string& ref, bool synthetic,
             const std::string& ppt_list) {
    if (!(s.tolerance > 0.0)) {
        throw ConfigError("--tolerance must be positive");
    }
    std::vector<io::EvalRow> rows;
    if (synthetic) {
        // est holds the annotation corpus
        require_exists(est);
        std::vector<Ppt> ppts;
        std::stringstream ss(ppt_list);
        for (std::string name; std::getline(ss, name, ',');) {
            ppts.push_back(parse_ppt(name));
        }
        const auto refs = read_annotation_corpus(est);
        if (refs.empty()) {
            throw ParseError("no " + std::string(io::kBeatsExtension) + " annotations under " + est);
        }
        const auto res = synthetic_benchmark(refs, ppts, ppt_options(s), s.tolerance, s.threads);
        for (const auto& r : res.rows) {
            rows.push_back({r.track_id, to_string(r.ppt), r.report});
        }
        for (const auto& [ppt, mean] : res.means) {
            print_summary(to_string(ppt), mean);
            rows.push_back({"mean", to_string(ppt), mean});
        }
    } else {
        require_exists(est);
        require_exists(ref);
        if (fs::is_directory(est) != fs::is_directory(ref)) {
            throw ConfigError("estimate and reference must both be files or both directories");
        }
        if (!fs::is_directory(est)) {
            const auto r = fmeasure(io::read_annotation(est), io::read_annotation(ref), s.tolerance);
            print_summary(s.ppt.empty() ? "eval" : s.ppt, r);
            rows.push_back({io::track_id(est, io::kBeatsExtension), s.ppt, r});
        } else {
            std::vector<EvalReport> reports;
            for (const auto& ref_path : io::list_corpus(ref, io::kBeatsExtension)) {
                const auto id = io::track_id(ref_path, io::kBeatsExtension);
                const auto est_path = fs::path(est) / (id + io::kBeatsExtension);
                require_exists(est_path.string());
                reports.push_back(fmeasure(io::read_annotation(est_path), io::read_annotation(ref_path), s.tolerance));
                rows.push_back({id, s.ppt, reports.back()});
            }
            const auto mean = mean_report(reports);
            print_summary(s.ppt, mean);
            rows.push_back({"mean", s.ppt, mean});
        }
    }
    if (!s.out.empty()) {
        auto out = open_output(s.out);
        io::write_eval_csv(out, rows);
    }
    return 0;
}

int cmd_stability(const Settings& s, const std::string& input, double tol) {
    require_exists(input);
    const auto refs = read_annotation_corpus(input);
    const auto rep = stability_report(refs, tol);
    for (std::size_t i = 0; i < rep.results.size(); ++i) {
        if (!rep.results[i].defined) {
            std::cerr << "warning: " << rep.track_ids[i] << " has fewer than two beats; counted as unstable\n";
        }
    }
    if (!s.out.empty()) {
        auto out = open_output(s.out);
        io::write_stability_csv(out, rep);
    } else {
        io::write_stability_csv(std::cout, rep);
    }
    std::size_t stable = 0;
    for (const auto& r : rep.results) {
        stable += r.stable ? 1 : 0;
    }
    std::fprintf(stderr, "stable tempo rate: %.1f%% (%zu/%zu)\n", rep.rate * 100.0, stable, rep.results.size());
    return 0;
}

int cmd_plp(const Settings& s, const std::string& input, const std::string& tempogram_path,
            const std::string& condition_path) {
    require_exists(input);
    const auto kernels = parse_list(s.kernels, "kernel");
    const auto range = tempo_range(s);
    for (double k : kernels) {
        kernel_config(k, range, s.harmonic_tie).validate(s.fps);
    }
    const auto act = io::read_activation(input, s.fps);
    std::vector<PlpCurve> curves;
    for (double k : kernels) {
        curves.push_back(plp(act, kernel_config(k, range, s.harmonic_tie)));
    }
    if (curves.size() > 1) {
        curves.push_back(combine_plp(curves));
    }
    emit(s.out, [&](std::ostream& os) { io::write_plp_csv(os, curves); });
    if (!tempogram_path.empty()) {
        auto out = open_output(tempogram_path);
        io::write_tempogram_csv(out, fourier_tempogram(act, kernel_config(kernels.front(), range, s.harmonic_tie)));
    }
    if (!condition_path.empty()) {
        const auto& curve = curves.back();
        auto out = open_output(condition_path);
        io::write_condition_csv(out, to_condition(curve, pick_peaks(curve.values())));
    }
    return 0;
}

int cmd_ibi(const Settings& s, const std::string& input) {
    require_exists(input);
    const auto beats = io::read_annotation(input);
    const auto prog = ibi_progression(beats);
    emit(s.out, [&](std::ostream& os) { io::write_ibi_csv(os, prog); });
    return 0;
}

int cmd_gridsearch(const Settings& s, const std::string& input, const std::string& ref_dir) {
    require_exists(input);
    const auto lambdas = s.lambda_trans.empty() ? default_lambda_grid() : parse_list(s.lambda_trans, "lambda-trans");
    for (double l : lambdas) {
        if (!(l >= 0.0)) {
            throw ConfigError("lambda-trans values must be nonnegative");
        }
    }
    std::vector<CorpusTrack> corpus;
    if (ref_dir.empty()) {
        // annotations only: synthetic activations
        for (auto& [id, ref] : read_annotation_corpus(input)) {
            auto act = synth_activation(ref, s.fps, s.epsilon);
            corpus.push_back({id, std::move(act), std::move(ref)});
        }
    } else {
        require_exists(ref_dir);
        for (const auto& f : io::list_corpus(input, io::kActivationExtension)) {
            const auto id = io::track_id(f, io::kActivationExtension);
            const auto ref_path = fs::path(ref_dir) / (id + io::kBeatsExtension);
            require_exists(ref_path.string());
            corpus.push_back({id, io::read_activation(f, s.fps), io::read_annotation(ref_path)});
        }
    }
    if (corpus.empty()) {
        throw ParseError("empty corpus under " + input);
    }
    HmmConfig base;
    base.tempo_range = tempo_range(s);
    std::vector<GridSearchRow> rows(lambdas.size());
    parallel_for(lambdas.size(), [&](std::size_t i) {
        rows[i] = grid_search_lambda_trans(corpus, std::span(&lambdas[i], 1), base, s.tolerance).front();
    }, s.threads);
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.lambda_trans < b.lambda_trans; });
    emit(s.out, [&](std::ostream& os) {
        os << "lambda_trans,f1,p,r\n";
        for (const auto& r : rows) {
            char buf[128];
            std::snprintf(buf, sizeof buf, "%g,%.6f,%.6f,%.6f\n", r.lambda_trans, r.report.f1,
                          r.report.precision, r.report.recall);
            os << buf;
        }
    });
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Beat tracking post-processing: PLPDP, DP, HMM and peak picking on activation functions"};
    app.set_config("--config", "", "TOML/INI config file (flags override it)");
    app.require_subcommand(1);
    bool dump_config = false;
    app.add_flag("--dump-config", dump_config, "Print the effective settings and exit");

    Settings s;
    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("--fps", s.fps, "Frame rate when the input has no '# fps=' header")->capture_default_str();
        sub->add_option("--out", s.out, "Output file or directory");
        sub->add_option("--threads", s.threads, "Worker threads in corpus mode (0 = all cores)");
    };
    const auto add_tracker = [&](CLI::App* sub) {
        sub->add_option("--ppt", s.ppt, "Tracker: sppk, dp, plpdp, plpdp-g3, hmm")->capture_default_str();
        sub->add_option("--kernels", s.kernels, "PLP kernel sizes in seconds")->capture_default_str();
        sub->add_option("--min-bpm", s.min_bpm, "Lowest tempo")->capture_default_str();
        sub->add_option("--max-bpm", s.max_bpm, "Highest tempo")->capture_default_str();
        sub->add_option("--lambda0", s.lambda0, "DP balance factor")->capture_default_str();
        sub->add_option("--lambda-trans", s.lambda_trans, "HMM tempo transition lambda (default 100)");
        sub->add_flag("--exact-dp", s.exact_dp, "Search all predecessors in DP (quadratic)");
        sub->add_option("--harmonic-tie", s.harmonic_tie,
                        "Relative tolerance under which tempo peaks tie and the slowest wins (0 = plain argmax)")
            ->capture_default_str();
    };

    std::string input, input2, tempogram_path, condition_path, ref_dir, ppt_list = "sppk,dp,hmm,plpdp-g3,plpdp";
    std::size_t corpus_size = 0;
    double duration = 60.0;
    double stability_tol = 0.04;
    bool synthetic = false;

    auto* track = app.add_subcommand("track", "Track beats in an activation file or directory");
    track->add_option("activation", input, "Activation file or directory of *.act.csv")->required();
    add_common(track);
    add_tracker(track);
    track->add_option("--ibi-from-ref", s.ibi_from_ref, "Annotation (or directory) giving DP its mean reference IBI");

    auto* synth = app.add_subcommand("synth", "Build pulse-train activations from annotations");
    synth->add_option("annotation", input, "Annotation file or directory of *.beats");
    add_common(synth);
    synth->add_option("--epsilon", s.epsilon, "Floor value; beats get 1 - epsilon")->capture_default_str();
    synth->add_option("--seed", s.seed, "Seed for --corpus")->capture_default_str();
    synth->add_option("--corpus", corpus_size, "Generate N synthetic tracks instead");
    synth->add_option("--duration", duration, "Track duration for --corpus (seconds)")->capture_default_str();

    auto* eval = app.add_subcommand("eval", "F-measure of estimates against references");
    eval->add_option("estimate", input, "Estimated beats (file or directory), or annotations with --synthetic")->required();
    eval->add_option("reference", input2, "Reference beats (file or directory)");
    add_common(eval);
    add_tracker(eval);
    eval->add_option("--tolerance", s.tolerance, "Matching tolerance in seconds")->capture_default_str();
    eval->add_flag("--synthetic", synthetic, "Run the synthetic-activation pipeline over the annotations");
    eval->add_option("--ppts", ppt_list, "Trackers for --synthetic")->capture_default_str();
    eval->add_option("--seed", s.seed, "Unused; accepted for config symmetry");

    auto* stab = app.add_subcommand("stability", "Tempo stability of annotations");
    stab->add_option("annotations", input, "Annotation file or directory")->required();
    add_common(stab);
    stab->add_option("--tolerance", stability_tol, "Relative tempo tolerance")->capture_default_str();

    auto* plp_cmd = app.add_subcommand("plp", "Export PLP curves (and optionally tempogram / conditions)");
    plp_cmd->add_option("activation", input, "Activation file")->required();
    add_common(plp_cmd);
    plp_cmd->add_option("--kernels", s.kernels, "PLP kernel sizes in seconds")->capture_default_str();
    plp_cmd->add_option("--min-bpm", s.min_bpm, "Lowest tempo")->capture_default_str();
    plp_cmd->add_option("--max-bpm", s.max_bpm, "Highest tempo")->capture_default_str();
    plp_cmd->add_option("--harmonic-tie", s.harmonic_tie, "Tempo peak tie tolerance (0 = plain argmax)")
        ->capture_default_str();
    plp_cmd->add_option("--tempogram", tempogram_path, "Also write tempogram magnitudes of the first kernel");
    plp_cmd->add_option("--condition", condition_path, "Also write confidence / estimated IBI of the last curve");

    auto* ibi = app.add_subcommand("ibi", "IBI progression of a beat file");
    ibi->add_option("beats", input, "Beat file")->required();
    add_common(ibi);

    auto* grid = app.add_subcommand("gridsearch", "Sweep the HMM tempo transition lambda");
    grid->add_option("corpus", input, "Annotation directory (synthetic) or activation directory with --ref")->required();
    grid->add_option("--ref", ref_dir, "Reference annotation directory for real activations");
    add_common(grid);
    grid->add_option("--lambda-trans", s.lambda_trans, "Comma-separated lambda list (default 0..20 step 1, 25..100 step 5)");
    grid->add_option("--tolerance", s.tolerance, "Matching tolerance in seconds")->capture_default_str();
    grid->add_option("--epsilon", s.epsilon, "Synthetic activation floor")->capture_default_str();
    grid->add_option("--min-bpm", s.min_bpm, "Lowest tempo")->capture_default_str();
    grid->add_option("--max-bpm", s.max_bpm, "Highest tempo")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitParams;
    }

    if (dump_config) {
        std::cout << app.config_to_str(true, false);
        return 0;
    }

    try {
        if (track->parsed()) {
            return cmd_track(s, input);
        }
        if (synth->parsed()) {
            return cmd_synth(s, input, corpus_size, duration);
        }
        if (eval->parsed()) {
            if (!synthetic && input2.empty()) {
                throw ConfigError("eval needs an estimate and a reference (or --synthetic)");
            }
            return cmd_eval(s, input, input2, synthetic, ppt_list);
        }
        if (stab->parsed()) {
            return cmd_stability(s, input, stability_tol);
        }
        if (plp_cmd->parsed()) {
            return cmd_plp(s, input, tempogram_path, condition_path);
        }
        if (ibi->parsed()) {
            return cmd_ibi(s, input);
        }
        if (grid->parsed()) {
            return cmd_gridsearch(s, input, ref_dir);
        }
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitParse;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitParams;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitParams;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitParse;
    }
    return kExitParams;
}
