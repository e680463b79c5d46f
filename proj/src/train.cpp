#include "dssn/train.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

namespace dssn {

namespace {

constexpr const char* kCheckpointMagic = "DSSNCKPT";
constexpr int kCheckpointVersion = 1;

static_assert(std::endian::native == std::endian::little, "checkpoint payload assumes a little-endian host");

std::string config_text(const ModelConfig& cfg)
{
    KeyValues kv;
    cfg.write(kv);
    return kv.str();
}

}  // namespace

std::uint64_t config_hash(const ModelConfig& cfg) { return fnv1a(config_text(cfg)); }

LossSwitches loss_switches(const TrainConfig& cfg)
{
    return {cfg.bce, cfg.iou, cfg.ssim, cfg.deep_supervision};
}

double evaluate_loss(const DssnModel<float>& model, const std::vector<const Sample*>& batch,
                     const LossSwitches& switches)
{
    std::vector<const HsiCube*> cubes;
    std::vector<const GroundTruth*> gts;
    for (const Sample* s : batch) {
        cubes.push_back(&s->cube);
        gts.push_back(&s->gt);
    }
    const auto targets = LossTargets<float>::from(gts);
    const ModelOutput<float> out = model.forward(constant(batch_tensor<float>(cubes)));
    return total_loss(out.deep, out.saliency, targets, switches).value().item();
}

TrainResult train(DssnModel<float>& model, const Dataset& data, const TrainConfig& cfg, const TrainHooks& hooks)
{
    cfg.validate();
    if (data.empty()) throw Error("train: empty dataset");
    for (const auto& s : data)
        if (s.cube.height != cfg.side || s.cube.width != cfg.side)
            throw ShapeError("train: sample " + s.id + " is " + std::to_string(s.cube.height) + "x" +
                             std::to_string(s.cube.width) + ", config side is " + std::to_string(cfg.side));
    const LossSwitches switches = loss_switches(cfg);
    if (switches.term_count() == 0) throw ConfigError("train: no loss terms enabled");

    std::mt19937_64 rng(cfg.seed);
    const int n = static_cast<int>(data.size());
    const int per_epoch = (n + cfg.batch - 1) / cfg.batch;
    const std::int64_t total = static_cast<std::int64_t>(per_epoch) * cfg.epochs;

    auto& store = model.params();
    std::vector<Tensor<float>*> params;
    std::vector<const Tensor<float>*> grads;
    NadamState<float> state;

    TrainResult result;
    std::vector<int> order(n);
    std::int64_t step = 0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        double epoch_sum = 0;
        for (int b = 0; b < per_epoch; ++b) {
            std::vector<Sample> augmented;
            std::vector<const HsiCube*> cubes;
            std::vector<const GroundTruth*> gts;
            const int lo = b * cfg.batch, hi = std::min(n, lo + cfg.batch);
            augmented.reserve(hi - lo);
            for (int i = lo; i < hi; ++i) {
                const Sample& s = data[order[i]];
                if (cfg.augment) {
                    auto [c, g] = augment(s.cube, s.gt, rng);
                    augmented.push_back({s.id, std::move(c), std::move(g)});
                } else {
                    augmented.push_back(s);
                }
            }
            for (const auto& s : augmented) {
                cubes.push_back(&s.cube);
                gts.push_back(&s.gt);
            }
            const double lr = cosine_lr(step, total, cfg.lr0);
            double loss_value = 0;
            try {
                const auto targets = LossTargets<float>::from(gts);
                const ModelOutput<float> out = model.forward(constant(batch_tensor<float>(cubes)));
                Var<float> loss = total_loss(out.deep, out.saliency, targets, switches);
                loss_value = loss.value().item();
                store.zero_grad();
                backward(loss);
                if (params.empty())
                    for (auto& v : store.vars()) {
                        params.push_back(&v.mutable_value());
                        grads.push_back(&v.grad());
                    }
                for (const Tensor<float>* g : grads)
                    if (!g->all_finite()) throw NumericError("non-finite gradient");
                nadam_step(params, grads, state, lr, {});
                for (const Tensor<float>* p : params)
                    if (!p->all_finite()) throw NumericError("non-finite parameter after update");
            } catch (const NumericError& e) {
                std::ostringstream msg;
                msg << "training diverged at epoch " << epoch << ", step " << step << " (lr " << lr
                    << ", last loss " << (result.step_loss.empty() ? NAN : result.step_loss.back())
                    << "): " << e.what();
                throw DivergenceError(msg.str());
            }
            result.step_loss.push_back(loss_value);
            epoch_sum += loss_value;
            ++step;
        }
        result.epoch_loss.push_back(epoch_sum / per_epoch);
        if (hooks.on_epoch) hooks.on_epoch(epoch, result.epoch_loss.back());
    }
    result.steps = static_cast<int>(step);
    return result;
}

void save_checkpoint(const std::filesystem::path& path, const DssnModel<float>& model)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("checkpoint: cannot write " + path.string());
    const auto& store = model.params();
    out << kCheckpointMagic << " " << kCheckpointVersion << "\n";
    out << "config_hash " << hex64(config_hash(model.config())) << "\n";
    std::istringstream cfg(config_text(model.config()));
    for (std::string line; std::getline(cfg, line);) out << "config " << line << "\n";
    for (std::size_t i = 0; i < store.vars().size(); ++i) {
        const Shape& s = store.vars()[i].shape();
        out << "param " << store.names()[i] << " " << s.n() << " " << s.h() << " " << s.w() << " " << s.c() << "\n";
    }
    out << "end_header\n";
    for (const auto& v : store.vars()) {
        const auto& data = v.value().storage();
        out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size() * 4));
    }
    if (!out) throw Error("checkpoint: write failed for " + path.string());
}

std::unique_ptr<DssnModel<float>> load_checkpoint(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("checkpoint: cannot open " + path.string());
    std::string magic;
    int version = 0;
    in >> magic >> version;
    if (magic != kCheckpointMagic) throw FormatError("checkpoint: bad magic in " + path.string());
    if (version != kCheckpointVersion) throw FormatError("checkpoint: unknown version " + std::to_string(version));
    in.ignore(1);

    std::string hash, text;
    struct Entry {
        std::string name;
        Shape shape;
    };
    std::vector<Entry> entries;
    for (std::string line; std::getline(in, line);) {
        if (line == "end_header") break;
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "config_hash") {
            ls >> hash;
        } else if (key == "config") {
            text += line.substr(7) + "\n";
        } else if (key == "param") {
            Entry e;
            int a, b, c, d;
            ls >> e.name >> a >> b >> c >> d;
            if (!ls) throw FormatError("checkpoint: bad param line '" + line + "'");
            e.shape = Shape(a, b, c, d);
            entries.push_back(e);
        } else {
            throw FormatError("checkpoint: unexpected header line '" + line + "'");
        }
    }
    const ModelConfig cfg = ModelConfig::from(KeyValues::parse(text));
    if (hex64(config_hash(cfg)) != hash) throw FormatError("checkpoint: config hash mismatch in " + path.string());
    auto model = std::make_unique<DssnModel<float>>(cfg);
    auto& store = model->params();
    if (entries.size() != store.vars().size())
        throw FormatError("checkpoint: " + std::to_string(entries.size()) + " parameters, model has " +
                          std::to_string(store.vars().size()));
    for (std::size_t i = 0; i < entries.size(); ++i) {
        auto& v = store.vars()[i];
        if (entries[i].name != store.names()[i] || !(entries[i].shape == v.shape()))
            throw FormatError("checkpoint: parameter " + entries[i].name + " does not match " + store.names()[i] +
                              " " + v.shape().str());
        auto& data = v.mutable_value().storage();
        in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size() * 4));
        if (!in) throw FormatError("checkpoint: truncated payload at " + entries[i].name);
    }
    if (in.peek() != std::char_traits<char>::eof()) throw FormatError("checkpoint: trailing bytes after payload");
    return model;
}

}  // namespace dssn
