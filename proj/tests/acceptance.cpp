// Acceptance run: one PASS / FAIL line per criterion.
//
//   acceptance [--cli path/to/dssn] [--only substring]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "dssn/ablate.hpp"
#include "dssn/bench.hpp"
#include "dssn/csab.hpp"
#include "dssn/evaluate.hpp"
#include "dssn/gradcheck.hpp"
#include "dssn/losses.hpp"
#include "dssn/metrics.hpp"
#include "dssn/random.hpp"
#include "dssn/train.hpp"
#include "metric_oracles.hpp"
#include "oracles.hpp"

using namespace dssn;
namespace fs = std::filesystem;

namespace {

constexpr double kGradTolerance = 1e-4;
constexpr int kGradCases = 20;
constexpr double kGradSeconds = 120;
constexpr double kRowSumTolerance = 1e-6;
constexpr std::size_t kAttentionPixels = 10000;
constexpr double kConvexSlack = 1e-12;
constexpr double kMetricTolerance = 1e-9;
constexpr int kMetricPairs = 100;
constexpr double kBceSelfBound = 1e-6;
constexpr int kOverfitSteps = 200;
constexpr double kOverfitLossRatio = 0.10;
constexpr double kOverfitMae = 0.05;
constexpr double kOverfitSeconds = 300;
constexpr double kBenchMargin = 0.10;
constexpr double kBenchSeconds = 1800;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
    enum Kind { pass, fail, skip } kind = fail;
    std::string detail;
};

Outcome verdict(bool ok, std::string detail) { return {ok ? Outcome::pass : Outcome::fail, std::move(detail)}; }

std::string fmt(const char* f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

std::string read_file(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

// ---------------------------------------------------------------------------

Outcome gradient_integrity()
{
    const auto t0 = Clock::now();
    GradcheckOptions o;
    o.tolerance = kGradTolerance;
    const auto summary = run_gradcheck_suite(kGradCases, 1, "", o);
    const double secs = seconds_since(t0);
    bool ok = secs < kGradSeconds && !summary.empty();
    double worst = 0;
    std::string failed;
    for (const auto& s : summary) {
        worst = std::max(worst, s.worst);
        if (!s.passed || s.cases < kGradCases) {
            ok = false;
            failed += " " + s.name;
        }
    }
    for (const char* required : {"spectral_attention_block", "hierarchical_fuse", "csab_forward", "hrfm_forward",
                                 "bce_loss", "iou_loss", "ssim_loss"}) {
        bool found = false;
        for (const auto& s : summary) found = found || s.name == required;
        if (!found) {
            ok = false;
            failed += std::string(" missing:") + required;
        }
    }
    return verdict(ok, fmt("%zu checks x %d cases, worst rel err %.2e, %.1f s%s", summary.size(), kGradCases, worst,
                           secs, failed.c_str()));
}

Outcome shape_contract()
{
    std::mt19937_64 rng(2);
    std::string bad;
    for (int side : {32, 64, 256}) {
        ModelConfig cfg;
        DssnModel<double> model(cfg);
        const auto cube = constant(oracle::random_tensor<double>(rng, Shape(1, side, side, cfg.in_bands), 0, 1));
        const auto out = model.forward(cube);
        for (int i = 1; i <= 5; ++i) {
            const int e = side >> i;
            if (out.pyramid.level(i).shape() != Shape(1, e, e, cfg.channels[i - 1]))
                bad += fmt(" side %d level %d %s;", side, i, out.pyramid.level(i).shape().str().c_str());
        }
        for (int q = 1; q <= 3; ++q) {
            const int e = side >> q;
            if (out.intermediate[q - 1].shape() != Shape(1, e, e, 1))
                bad += fmt(" side %d S_%d %s;", side, q, out.intermediate[q - 1].shape().str().c_str());
        }
        if (out.saliency.shape() != Shape(1, side, side, 1))
            bad += fmt(" side %d S_m %s;", side, out.saliency.shape().str().c_str());
    }
    return verdict(bad.empty(), bad.empty() ? "sides 32, 64, 256: levels 1-5, S_1..S_3 and S_m exact" : bad);
}

Outcome attention_normalization()
{
    std::mt19937_64 rng(3);
    ModelConfig cfg;
    DssnModel<double> model(cfg);
    // Nonzero biases so the attention logits are not trivially tied.
    for (std::size_t i = 0; i < model.params().vars().size(); ++i)
        if (model.params().names()[i].ends_with(".bias"))
            model.params().vars()[i].mutable_value() =
                oracle::random_tensor<double>(rng, model.params().vars()[i].shape(), -0.2, 0.2);
    const auto cube = constant(oracle::random_tensor<double>(rng, Shape(1, 256, 256, cfg.in_bands), 0, 1));
    const auto pyr = model.sjfe()(cube).joint;
    std::size_t pixels = 0;
    double worst_sum = 0, worst_out = 0;
    for (int q = 1; q <= 3; ++q) {
        const auto out = model.csab(q)(pyr);
        const Tensor<double> a = out.attention.value(), m = out.similarity.value(), s = out.saliency.value();
        const int j = 5 - q;
        for (std::size_t p = 0; p < s.size(); ++p, ++pixels) {
            double sum = 0, lo = m[p * j], hi = m[p * j];
            for (int k = 0; k < j; ++k) {
                sum += a[p * j + k];
                lo = std::min(lo, m[p * j + k]);
                hi = std::max(hi, m[p * j + k]);
            }
            worst_sum = std::max(worst_sum, std::abs(sum - 1));
            worst_out = std::max(worst_out, std::max(lo - s[p], s[p] - hi));
        }
    }
    const bool ok = pixels >= kAttentionPixels && worst_sum <= kRowSumTolerance && worst_out <= kConvexSlack;
    return verdict(ok, fmt("%zu pixels, max |sum - 1| %.2e, max excursion outside [min M, max M] %.2e", pixels,
                           worst_sum, std::max(worst_out, 0.0)));
}

GroundTruth random_gt(std::mt19937_64& rng, int side)
{
    for (;;) {
        GroundTruth gt;
        gt.height = gt.width = side;
        const double fg = uniform(rng, 0.1, 0.9), ignore = uniform(rng, 0.0, 0.15);
        for (int i = 0; i < side * side; ++i) {
            const double u = uniform01(rng);
            gt.labels.push_back(static_cast<std::int8_t>(u < ignore ? -1 : (uniform01(rng) < fg ? 1 : 0)));
        }
        if (gt.count(1) > 0 && gt.count(0) > 0) return gt;
    }
}

Outcome metric_oracles()
{
    std::mt19937_64 rng(4);
    double worst = 0;
    int exact_misses = 0;
    for (int t = 0; t < kMetricPairs; ++t) {
        const GroundTruth gt = random_gt(rng, 16);
        std::vector<double> s(256);
        for (auto& v : s) v = t % 2 ? uniform01(rng) : uniform_int(rng, 0, 255) / 255.0;
        exact_misses += f_beta_max(s, gt) != oracle::f_beta_max(s, gt);
        const AucCc a = auc_cc(s, gt);
        exact_misses += a.auc != oracle::auc(s, gt);
        worst = std::max({worst, std::abs(mae(s, gt) - oracle::mae(s, gt)),
                          std::abs(e_measure(s, gt) - oracle::e_measure(s, gt)),
                          std::abs(s_measure(s, gt) - oracle::s_measure(s, gt)), std::abs(a.cc - oracle::cc(s, gt))});
    }
    return verdict(exact_misses == 0 && worst <= kMetricTolerance,
                   fmt("%d pairs: F_beta/AUC mismatches %d, max deviation MAE/E/S/CC %.2e", kMetricPairs,
                       exact_misses, worst));
}

Outcome loss_identities()
{
    std::mt19937_64 rng(5);
    double iou_worst = 0, bce_worst = 0;
    bool composed = true;
    for (int t = 0; t < 50; ++t) {
        const GroundTruth gt = random_gt(rng, 12);
        const auto targets = LossTargets<double>::from(gt);
        Tensor<double> g(Shape(1, 12, 12, 1));
        for (std::size_t i = 0; i < g.size(); ++i) g[i] = gt.labels[i] == 1 ? 1.0 : 0.0;
        const auto x = constant(g);
        iou_worst = std::max(iou_worst, std::abs(iou_loss(x, targets).value().item()));
        bce_worst = std::max(bce_worst, bce_loss(x, targets).value().item());

        const auto deep = constant(oracle::random_tensor<double>(rng, g.shape(), 0, 1));
        const auto sal = constant(oracle::random_tensor<double>(rng, g.shape(), 0, 1));
        const double four = bce_loss(deep, targets).value().item() + iou_loss(deep, targets).value().item() +
                            bce_loss(sal, targets).value().item() + iou_loss(sal, targets).value().item();
        composed = composed && total_loss(deep, sal, targets, LossSwitches{}).value().item() == four;
    }
    return verdict(iou_worst == 0 && bce_worst <= kBceSelfBound && composed,
                   fmt("iou(G,G) max %.1e, bce(G,G) max %.2e, total = sum of four terms exactly: %s", iou_worst,
                       bce_worst, composed ? "yes" : "no"));
}

Outcome single_sample_overfit()
{
    SceneOptions so;
    so.side = 64;
    so.bands = 8;
    const Dataset data = to_dataset(synthetic_scenes(1, 99, so), 64);
    ModelConfig mc;
    mc.in_bands = 8;
    mc = mc.scaled_channels(0.5);
    TrainConfig tc;
    tc.side = 64;
    tc.batch = 1;
    tc.epochs = kOverfitSteps;
    tc.augment = false;

    DssnModel<float> model(mc);
    const std::vector<const Sample*> batch{&data[0]};
    const auto t0 = Clock::now();
    LossSwitches final_only = loss_switches(tc);
    final_only.deep_supervision = false;
    const double before = evaluate_loss(model, batch, loss_switches(tc));
    const double before_final = evaluate_loss(model, batch, final_only);
    const TrainResult r = train(model, data, tc);
    const double after = evaluate_loss(model, batch, loss_switches(tc));
    const double after_final = evaluate_loss(model, batch, final_only);
    const double m = mae(model_saliency(model, data[0]), data[0].gt);
    const double secs = seconds_since(t0);
    const bool ok = r.steps == kOverfitSteps && after < kOverfitLossRatio * before && m < kOverfitMae &&
                    secs < kOverfitSeconds;
    // The S_m terms alone are reported for diagnosis; the verdict uses the full objective.
    return verdict(ok, fmt("%d steps, loss %.4f -> %.4f (%.1f%%; S_m terms %.4f -> %.4f), MAE %.4f, %.1f s", r.steps,
                           before, after, 100 * after / before, before_final, after_final, m, secs));
}

// Benchmark training is shared with the ablation criterion.
struct Bench {
    BenchmarkConfig cfg = BenchmarkConfig::desk();
    BenchmarkData data;
    EvalReport dssn, sed, sg;
    double seconds = 0;
};

Bench& bench()
{
    static std::optional<Bench> b;
    if (b) return *b;
    b.emplace();
    const auto t0 = Clock::now();
    b->data = make_benchmark_data(b->cfg);
    DssnModel<float> model(b->cfg.model);
    train(model, b->data.train, b->cfg.train);
    EvalOptions opts;
    opts.timing = false;
    b->dssn = evaluate_model(model, b->data.test, opts);
    b->sed = evaluate_baseline(BaselineMode::sed, b->data.test, opts);
    b->sg = evaluate_baseline(BaselineMode::sg, b->data.test, opts);
    b->seconds = seconds_since(t0);
    return *b;
}

Outcome benchmark_ordering()
{
    const Bench& b = bench();
    const auto& d = b.dssn.means;
    const double best = std::max(b.sed.means.f_beta, b.sg.means.f_beta);
    const bool ok = d.f_beta >= best + kBenchMargin && d.mae < b.sed.means.mae && d.mae < b.sg.means.mae &&
                    b.seconds < kBenchSeconds;
    return verdict(ok, fmt("%zu/%zu scenes, F_beta DSSN %.3f SED %.3f SG %.3f (need >= %.3f); MAE DSSN %.3f SED %.3f "
                           "SG %.3f; %.0f s",
                           b.data.train.size(), b.data.test.size(), d.f_beta, b.sed.means.f_beta, b.sg.means.f_beta,
                           best + kBenchMargin, d.mae, b.sed.means.mae, b.sg.means.mae, b.seconds));
}

double row_f_beta(const AblationRow& row, const Bench& b)
{
    DssnModel<float> model(row.model);
    train(model, b.data.train, row.train);
    EvalOptions opts;
    opts.timing = false;
    return evaluate_model(model, b.data.test, opts).means.f_beta;
}

const AblationRow& find_row(const std::vector<AblationRow>& rows, const std::string& label)
{
    for (const auto& r : rows)
        if (r.label == label) return r;
    throw Error("no ablation row " + label);
}

Outcome ablation_direction()
{
    const Bench& b = bench();
    const auto grid = ablation_rows(AblationAxis::csab, b.cfg.model, b.cfg.train);
    const auto loss = ablation_rows(AblationAxis::loss, b.cfg.model, b.cfg.train);
    // The full row and the bce+iou row are the benchmark configuration itself.
    const double full = b.dssn.means.f_beta;
    const double sum = row_f_beta(find_row(grid, "sum+hrfm"), b);
    const double stacked = row_f_beta(find_row(grid, "csab+stacked"), b);
    const double bce = row_f_beta(find_row(loss, "bce"), b);
    const double iou = row_f_beta(find_row(loss, "iou"), b);
    const bool ok = full > sum && full > stacked && full > bce && full > iou;
    return verdict(ok, fmt("F_beta csab+hrfm %.3f vs sum+hrfm %.3f, csab+stacked %.3f; bce+iou %.3f vs bce %.3f, "
                           "iou %.3f",
                           full, sum, stacked, full, bce, iou));
}

Outcome baseline_invariance()
{
    SceneOptions so;
    so.side = 64;
    const auto scenes = synthetic_scenes(3, 7, so);
    int sg_diff = 0, sed_same = 0, checks = 0;
    for (const auto& sc : scenes) {
        const Sample s = prepare_sample(sc.id, sc.cube, sc.gt, 64);
        const auto sg = classical_saliency(s.cube, BaselineMode::sg).map;
        const auto sed = classical_saliency(s.cube, BaselineMode::sed).raw;
        for (float k : {0.5f, 2.0f, 8.0f}) {
            HsiCube scaled = s.cube;
            for (float& v : scaled.values) v *= k;
            ++checks;
            sg_diff += classical_saliency(scaled, BaselineMode::sg).map != sg;
            sed_same += classical_saliency(scaled, BaselineMode::sed).raw == sed;
        }
    }
    return verdict(sg_diff == 0 && sed_same == 0,
                   fmt("%d scaled cubes: SG maps differing %d, SED maps identical %d", checks, sg_diff, sed_same));
}

int run(const std::string& cmd)
{
    return std::system((cmd + " > /dev/null 2>&1").c_str());
}

Outcome determinism(const std::string& cli)
{
    if (cli.empty() || !fs::exists(cli)) return verdict(false, "dssn executable not found: '" + cli + "'");
    const fs::path dir = fs::temp_directory_path() / "dssn_acceptance_determinism";
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::ofstream(dir / "run.cfg") << "synth.side = 32\nsynth.bands = 8\nmodel.bands = 8\n"
                                      "model.channels = 4,6,8,8,12\ntrain.side = 32\ntrain.epochs = 2\n"
                                      "train.batch = 2\ndata.train_count = 6\ndata.test_count = 4\n";
    const std::string base = "\"" + cli + "\" ";
    const std::string cfg = " -c \"" + (dir / "run.cfg").string() + "\"";
    for (const char* tag : {"a", "b"}) {
        const fs::path ckpt = dir / (std::string(tag) + ".ckpt");
        if (run(base + "train" + cfg + " -o \"" + ckpt.string() + "\" --log \"" + (dir / tag).string() + ".log\"") != 0)
            return verdict(false, "train failed");
        if (run(base + "eval" + cfg + " --no-timing --baselines -k \"" + ckpt.string() + "\" --csv \"" +
                (dir / tag).string() + ".csv\" --table \"" + (dir / tag).string() + ".txt\"") != 0)
            return verdict(false, "eval failed");
    }
    std::string differ;
    for (const char* ext : {".ckpt", ".log", ".csv", ".txt"}) {
        const std::string a = read_file(dir / (std::string("a") + ext)), b = read_file(dir / (std::string("b") + ext));
        if (a.empty() || a != b) differ += std::string(" ") + ext;
    }
    return verdict(differ.empty(), differ.empty() ? "checkpoint, loss log, per-image CSV and table identical across "
                                                    "two runs"
                                                  : "differing:" + differ);
}

Outcome hrssd(const std::string& cli)
{
    const char* dir = std::getenv("HRSSD_DIR");
    if (!dir || !*dir) return {Outcome::skip, "HRSSD_DIR not set"};
    if (cli.empty() || !fs::exists(cli)) return verdict(false, "dssn executable not found");
    const fs::path work = fs::temp_directory_path() / "dssn_acceptance_hrssd";
    fs::remove_all(work);
    fs::create_directories(work);
    fs::path ckpt;
    if (const char* k = std::getenv("HRSSD_CHECKPOINT"); k && *k) {
        ckpt = k;
    } else {
        ckpt = work / "untrained.ckpt";
        save_checkpoint(ckpt, DssnModel<float>(ModelConfig{}));
    }
    const fs::path table = work / "table.txt";
    const std::string cmd = "\"" + cli + "\" eval --preset full -k \"" + ckpt.string() + "\" -d \"" + dir +
                            "\" --baselines --table \"" + table.string() + "\"";
    if (run(cmd) != 0) return verdict(false, "eval failed: " + cmd);
    // Table header: cells separated by '|', padded with spaces.
    const std::string text = read_file(table);
    std::vector<std::string> got;
    std::istringstream row(text.substr(0, text.find('\n')));
    for (std::string cell; std::getline(row, cell, '|');) {
        const auto b = cell.find_first_not_of(' '), e = cell.find_last_not_of(' ');
        got.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
    }
    const std::vector<std::string> want = {"Method", "Year", "MAE", "Fβ", "Eξ", "Sα", "FLOPs (G)", "#Params (M)",
                                           "Speed (FPS)"};
    std::string header;
    for (const auto& c : got) header += (header.empty() ? "" : ", ") + c;
    return verdict(got == want, "table columns: " + header);
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"acceptance criteria"};
    std::string cli, only;
    app.add_option("--cli", cli, "dssn executable");
    app.add_option("--only", only, "run criteria whose name contains this");
    CLI11_PARSE(app, argc, argv);

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"gradient-integrity", gradient_integrity},
        {"shape-contract", shape_contract},
        {"attention-normalization", attention_normalization},
        {"metric-oracles", metric_oracles},
        {"loss-identities", loss_identities},
        {"single-sample-overfit", single_sample_overfit},
        {"benchmark-ordering", benchmark_ordering},
        {"ablation-direction", ablation_direction},
        {"baseline-invariance", baseline_invariance},
        {"determinism", [&] { return determinism(cli); }},
        {"hrssd-pipeline", [&] { return hrssd(cli); }},
    };
    int failed = 0;
    for (const auto& [name, check] : criteria) {
        if (!only.empty() && name.find(only) == std::string::npos) continue;
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = verdict(false, std::string("exception: ") + e.what());
        }
        const char* tag = o.kind == Outcome::pass ? "PASS" : o.kind == Outcome::skip ? "SKIP" : "FAIL";
        std::cout << tag << " " << name << ": " << o.detail << std::endl;
        failed += o.kind == Outcome::fail;
    }
    return failed == 0 ? 0 : 1;
}
