// Command-line front end: synth, train, eval, baseline, ablate, gradcheck, bench.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "dssn/ablate.hpp"
#include "dssn/baselines.hpp"
#include "dssn/bench.hpp"
#include "dssn/evaluate.hpp"
#include "dssn/gradcheck.hpp"
#include "dssn/mapio.hpp"
#include "dssn/train.hpp"

namespace fs = std::filesystem;
using namespace dssn;

namespace {

struct ConfigArgs {
    std::string file;
    std::vector<std::string> overrides;
    std::string preset = "desk";

    void attach(CLI::App* app)
    {
        app->add_option("-c,--config", file, "key = value config file");
        app->add_option("--set", overrides, "override, e.g. --set train.epochs=5")->take_all();
        app->add_option("--preset", preset, "defaults before the config: desk or full")
            ->check(CLI::IsMember({"desk", "full"}));
    }

    KeyValues kv() const
    {
        KeyValues kv = file.empty() ? KeyValues{} : KeyValues::load(file);
        for (const auto& o : overrides) kv.set_override(o);
        return kv;
    }

    BenchmarkConfig bench() const
    {
        KeyValues merged;
        if (preset == "full") {
            BenchmarkConfig p;
            p.train.side = 256;
            p.scenes.side = 256;
            p.write(merged);
        }
        const KeyValues given = kv();
        for (const auto& [k, v] : given.entries()) merged.set(k, v);
        return BenchmarkConfig::from(merged);
    }
};

void write_text(const std::string& path, const std::string& text)
{
    if (path.empty()) return;
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << text;
}

Dataset dataset_for(const std::string& dir, const BenchmarkConfig& cfg, bool test_split)
{
    if (!dir.empty()) return load_directory(dir, cfg.train.side);
    const BenchmarkData d = make_benchmark_data(cfg);
    return test_split ? d.test : d.train;
}

void save_maps(const std::string& dir, const Sample& s, const std::vector<double>& map, const std::string& suffix)
{
    if (dir.empty()) return;
    fs::create_directories(dir);
    write_pgm(fs::path(dir) / (s.id + suffix + ".pgm"), map, s.cube.height, s.cube.width);
    write_float_map(fs::path(dir) / (s.id + suffix + ".f32"), map, s.cube.height, s.cube.width);
}

int cmd_synth(const ConfigArgs& ca, const std::string& out, int count, std::uint64_t seed)
{
    const SceneOptions opts = scene_options_from(ca.kv(), BenchmarkConfig::desk().scenes);
    const auto scenes = synthetic_scenes(count, seed, opts);
    write_scene_directory(out, scenes, opts, seed);
    std::cout << "wrote " << scenes.size() << " scenes to " << out << "\n";
    return 0;
}

int cmd_train(const ConfigArgs& ca, const std::string& data, const std::string& out, const std::string& log)
{
    const BenchmarkConfig cfg = ca.bench();
    const Dataset train_set = dataset_for(data, cfg, false);
    DssnModel<float> model(cfg.model);
    std::cout << "parameters: " << model.param_count() << ", samples: " << train_set.size() << "\n";
    std::ostringstream csv;
    csv << "epoch,loss\n";
    TrainHooks hooks;
    hooks.on_epoch = [&](int epoch, double loss) {
        char line[64];
        std::snprintf(line, sizeof line, "%d,%.9g\n", epoch + 1, loss);
        csv << line;
        std::cout << "epoch " << epoch + 1 << "/" << cfg.train.epochs << " loss " << loss << std::endl;
    };
    train(model, train_set, cfg.train, hooks);
    save_checkpoint(out, model);
    write_text(log, csv.str());
    std::cout << "checkpoint: " << out << "\n";
    return 0;
}

struct EvalArgs {
    std::string checkpoint, data, csv, table, summary, maps;
    bool no_timing = false;
    bool baselines = false;
};

int cmd_eval(const ConfigArgs& ca, const EvalArgs& a)
{
    BenchmarkConfig cfg = ca.bench();
    auto model = load_checkpoint(a.checkpoint);
    const Dataset test = dataset_for(a.data, cfg, true);
    EvalOptions opts;
    opts.method = "DSSN";
    opts.year = "2025";
    opts.timing = !a.no_timing;

    std::vector<EvalReport> reports;
    reports.push_back(evaluate(
        [&](const Sample& s) {
            auto map = model_saliency(*model, s);
            save_maps(a.maps, s, map, "");
            return map;
        },
        test, opts));
    reports.back().flops = model->flops(test.front().cube.height, test.front().cube.width);
    reports.back().params = static_cast<double>(model->param_count());
    if (a.baselines)
        for (BaselineMode m : {BaselineMode::sed, BaselineMode::sg}) {
            EvalOptions b = opts;
            b.method = baseline_name(m);
            b.year = "2013";
            reports.push_back(evaluate_baseline(m, test, b));
        }
    const std::string table = summary_table(reports);
    std::cout << table;
    write_text(a.table, table);
    write_text(a.csv, report_csv(reports.front()));
    write_text(a.summary, summary_csv(reports));
    return 0;
}

int cmd_baseline(const ConfigArgs& ca, const std::string& mode_name, const std::string& input, std::string payload,
                 const std::string& out, const std::string& data, const std::string& csv, bool no_timing)
{
    const BaselineMode mode = parse_baseline_mode(mode_name);
    if (!data.empty()) {
        const BenchmarkConfig cfg = ca.bench();
        EvalOptions opts;
        opts.method = baseline_name(mode);
        opts.year = "2013";
        opts.timing = !no_timing;
        const EvalReport r = evaluate_baseline(mode, load_directory(data, cfg.train.side), opts);
        std::cout << summary_table({r});
        write_text(csv, report_csv(r));
        return 0;
    }
    if (input.empty() || out.empty()) throw Error("baseline: need --input and --out, or --data");
    if (payload.empty()) payload = fs::path(input).replace_extension(".dat").string();
    LabeledCube lc = load_cube(input, payload);
    const HsiCube cube = lc.cube.scaled ? lc.cube : scale_radiometric(lc.cube);
    const ClassicalResult r = classical_saliency(cube, mode);
    if (r.degenerate) std::cerr << "warning: constant contrast map, output is all zeros\n";
    write_pgm(out + ".pgm", r.map, cube.height, cube.width);
    write_float_map(out + ".f32", r.map, cube.height, cube.width);
    std::cout << "wrote " << out << ".pgm and " << out << ".f32 (" << cube.height << "x" << cube.width << ")\n";
    return 0;
}

int cmd_ablate(const ConfigArgs& ca, const std::string& axis_name_arg, const std::string& table_path,
               const std::string& csv_path, bool no_timing)
{
    const AblationAxis axis = parse_ablation_axis(axis_name_arg);
    const BenchmarkConfig cfg = ca.bench();
    const BenchmarkData data = make_benchmark_data(cfg);
    EvalOptions opts;
    opts.timing = !no_timing;
    std::vector<EvalReport> reports;
    for (const auto& r : ablate(axis, cfg.model, cfg.train, data.train, data.test, opts,
                                [](const AblationRow& row, const EvalReport& rep) {
                                    std::cout << row.label << ": "
                                              << (rep.failure.empty() ? "F_beta " + std::to_string(rep.means.f_beta)
                                                                      : "failed")
                                              << std::endl;
                                }))
        reports.push_back(r.report);
    const std::string table = summary_table(reports);
    std::cout << table;
    write_text(table_path, table);
    write_text(csv_path, summary_csv(reports));
    return 0;
}

int cmd_gradcheck(int cases, std::uint64_t seed, const std::string& filter)
{
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = true;
    for (const auto& s : run_gradcheck_suite(cases, seed, filter)) {
        std::printf("%-26s cases %3d  worst rel err %.3e  %s\n", s.name.c_str(), s.cases, s.worst,
                    s.passed ? "PASS" : "FAIL");
        ok = ok && s.passed;
    }
    std::printf("elapsed %.1f s\n", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    return ok ? 0 : 1;
}

int cmd_bench(const ConfigArgs& ca, bool no_timing, const std::string& table_path)
{
    const BenchmarkConfig cfg = ca.bench();
    std::cout << "model size\n";
    for (const auto& [label, mc] : {std::pair<std::string, ModelConfig>{"full plan", ModelConfig{}},
                                    std::pair<std::string, ModelConfig>{"configured", cfg.model}}) {
        DssnModel<float> m(mc);
        for (int side : {256, 512})
            std::printf("  %-10s %3d x %3d: %.3f GFLOPs, %.3f M params\n", label.c_str(), side, side,
                        m.flops(side, side) * 1e-9, m.param_count() * 1e-6);
    }

    const BenchmarkData data = make_benchmark_data(cfg);
    DssnModel<float> model(cfg.model);
    const auto t0 = std::chrono::steady_clock::now();
    TrainHooks hooks;
    hooks.on_epoch = [&](int epoch, double loss) {
        std::cout << "epoch " << epoch + 1 << "/" << cfg.train.epochs << " loss " << loss << std::endl;
    };
    train(model, data.train, cfg.train, hooks);
    const double train_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    EvalOptions opts;
    opts.timing = !no_timing;
    std::vector<EvalReport> reports;
    opts.method = "DSSN";
    opts.year = "2025";
    reports.push_back(evaluate_model(model, data.test, opts));
    for (BaselineMode m : {BaselineMode::sed, BaselineMode::sg}) {
        opts.method = baseline_name(m);
        opts.year = "2013";
        reports.push_back(evaluate_baseline(m, data.test, opts));
    }
    const std::string table = summary_table(reports);
    std::cout << table;
    if (!no_timing) std::printf("training time %.1f s\n", train_s);
    write_text(table_path, table);
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Hyperspectral salient object detection"};
    app.require_subcommand(1);

    ConfigArgs synth_cfg, train_cfg, eval_cfg, base_cfg, ablate_cfg, bench_cfg;

    auto* synth = app.add_subcommand("synth", "generate labelled synthetic scenes");
    std::string synth_out;
    int synth_count = 10;
    std::uint64_t synth_seed = 1;
    synth_cfg.attach(synth);
    synth->add_option("-o,--out", synth_out, "output directory")->required();
    synth->add_option("-n,--count", synth_count, "number of scenes")->check(CLI::PositiveNumber);
    synth->add_option("--seed", synth_seed, "scene seed");

    auto* tr = app.add_subcommand("train", "train a model and write a checkpoint");
    std::string train_data, train_out, train_log;
    train_cfg.attach(tr);
    tr->add_option("-d,--data", train_data, "cube directory (default: synthetic train split)");
    tr->add_option("-o,--out", train_out, "checkpoint path")->required();
    tr->add_option("--log", train_log, "per-epoch loss CSV");

    auto* ev = app.add_subcommand("eval", "evaluate a checkpoint");
    EvalArgs ea;
    eval_cfg.attach(ev);
    ev->add_option("-k,--checkpoint", ea.checkpoint, "checkpoint path")->required();
    ev->add_option("-d,--data", ea.data, "cube directory (default: synthetic test split)");
    ev->add_option("--csv", ea.csv, "per-image metrics CSV");
    ev->add_option("--table", ea.table, "summary table text file");
    ev->add_option("--summary-csv", ea.summary, "summary table as CSV");
    ev->add_option("--maps", ea.maps, "directory for PGM and float32 saliency maps");
    ev->add_flag("--no-timing", ea.no_timing, "omit wall-clock speed (reports become reproducible)");
    ev->add_flag("--baselines", ea.baselines, "add SED and SG rows");

    auto* bl = app.add_subcommand("baseline", "classical spectral saliency");
    std::string bl_mode = "sed", bl_input, bl_payload, bl_out, bl_data, bl_csv;
    bool bl_no_timing = false;
    base_cfg.attach(bl);
    bl->add_option("-m,--mode", bl_mode, "sed or sg")->check(CLI::IsMember({"sed", "sg"}));
    bl->add_option("-i,--input", bl_input, "cube header");
    bl->add_option("--payload", bl_payload, "cube payload (default: header with .dat)");
    bl->add_option("-o,--out", bl_out, "output prefix for .pgm and .f32");
    bl->add_option("-d,--data", bl_data, "evaluate over a cube directory instead");
    bl->add_option("--csv", bl_csv, "per-image metrics CSV (with --data)");
    bl->add_flag("--no-timing", bl_no_timing, "omit wall-clock speed");

    auto* ab = app.add_subcommand("ablate", "train and evaluate ablation rows");
    std::string ab_axis, ab_table, ab_csv;
    bool ab_no_timing = false;
    ablate_cfg.attach(ab);
    ab->add_option("-a,--axis", ab_axis, "modality, csab, hrfm or loss")->required();
    ab->add_option("--table", ab_table, "summary table text file");
    ab->add_option("--csv", ab_csv, "summary CSV");
    ab->add_flag("--no-timing", ab_no_timing, "omit wall-clock speed");

    auto* gc = app.add_subcommand("gradcheck", "finite-difference gradient checks");
    int gc_cases = 20;
    std::uint64_t gc_seed = 1;
    std::string gc_filter;
    gc->add_option("--cases", gc_cases, "random cases per check")->check(CLI::PositiveNumber);
    gc->add_option("--seed", gc_seed, "seed");
    gc->add_option("--filter", gc_filter, "only checks whose name contains this");

    auto* bn = app.add_subcommand("bench", "synthetic benchmark: DSSN against SED and SG");
    bool bn_no_timing = false;
    std::string bn_table;
    bench_cfg.attach(bn);
    bn->add_flag("--no-timing", bn_no_timing, "omit wall-clock speed");
    bn->add_option("--table", bn_table, "summary table text file");

    CLI11_PARSE(app, argc, argv);
    try {
        if (*synth) return cmd_synth(synth_cfg, synth_out, synth_count, synth_seed);
        if (*tr) return cmd_train(train_cfg, train_data, train_out, train_log);
        if (*ev) return cmd_eval(eval_cfg, ea);
        if (*bl)
            return cmd_baseline(base_cfg, bl_mode, bl_input, bl_payload, bl_out, bl_data, bl_csv, bl_no_timing);
        if (*ab) return cmd_ablate(ablate_cfg, ab_axis, ab_table, ab_csv, ab_no_timing);
        if (*gc) return cmd_gradcheck(gc_cases, gc_seed, gc_filter);
        if (*bn) return cmd_bench(bench_cfg, bn_no_timing, bn_table);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
