#include "gcnref/gcn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "gcnref/errors.hpp"
#include "gcnref/rng.hpp"
#include "gcnref/uncertainty.hpp"

namespace gcnref {

namespace {

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

std::size_t count_labeled(const std::vector<int>& labels, std::size_t* fg = nullptr,
                          std::size_t* bg = nullptr) {
    std::size_t f = 0, b = 0;
    for (int l : labels) {
        if (l == kLabelForeground) ++f;
        else if (l == kLabelBackground) ++b;
        else if (l != kUnlabeled) throw ValidationError("labels must be 0, 1 or -1");
    }
    if (fg) *fg = f;
    if (bg) *bg = b;
    return f + b;
}

// dense C = A^T * B for row-major A (n x p) and B (n x q)
void gemm_at_b(const std::vector<double>& a, const std::vector<double>& b,
               std::size_t n, std::size_t p, std::size_t q, std::vector<double>& c) {
    c.assign(p * q, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t r = 0; r < p; ++r) {
            const double av = a[i * p + r];
            if (av == 0.0) continue;
            for (std::size_t s = 0; s < q; ++s) c[r * q + s] += av * b[i * q + s];
        }
}

// dense C = A * B for row-major A (n x p) and B (p x q)
void gemm(const std::vector<double>& a, const std::vector<double>& b, std::size_t n,
          std::size_t p, std::size_t q, std::vector<double>& c) {
    c.assign(n * q, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t r = 0; r < p; ++r) {
            const double av = a[i * p + r];
            if (av == 0.0) continue;
            for (std::size_t s = 0; s < q; ++s) c[i * q + s] += av * b[r * q + s];
        }
}

struct ForwardCache {
    std::vector<double> p1;      // A_hat X,  n x f
    std::vector<double> z1;      // P1 W0,    n x h
    std::vector<double> h1;      // relu(Z1), n x h
    std::vector<double> p2;      // A_hat H1, n x h
    std::vector<double> logits;  // P2 W1,    n x 1
};

void run_forward(const GcnModel& model, const CsrMatrix& a_hat,
                 const std::vector<double>& x, ForwardCache& cache) {
    const auto n = static_cast<std::size_t>(a_hat.rows);
    const auto h = static_cast<std::size_t>(model.hidden);
    if (model.w0.size() != kFeatureCount * h || model.w1.size() != h)
        throw ValidationError("model weight shapes do not match hidden size");
    if (x.size() != n * kFeatureCount)
        throw ValidationError("feature matrix size does not match the graph");

    spmm(a_hat, x, kFeatureCount, cache.p1);
    gemm(cache.p1, model.w0, n, kFeatureCount, h, cache.z1);
    cache.h1 = cache.z1;
    for (auto& v : cache.h1) v = std::max(0.0, v);
    spmm(a_hat, cache.h1, static_cast<int>(h), cache.p2);
    gemm(cache.p2, model.w1, n, h, 1, cache.logits);
}

// backward pass over an existing cache; m is the labeled-node count
Gradients backward(const GcnModel& model, const CsrMatrix& a_hat,
                   const std::vector<int>& labels, std::size_t m,
                   const ForwardCache& cache) {
    const auto n = static_cast<std::size_t>(a_hat.rows);
    const auto h = static_cast<std::size_t>(model.hidden);

    // g = dL/dz = (sigma(z) - y) / m on labeled nodes, 0 elsewhere
    std::vector<double> g(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (labels[i] == kUnlabeled) continue;
        const double y = labels[i] == kLabelForeground ? 1.0 : 0.0;
        g[i] = (sigmoid(cache.logits[i]) - y) / static_cast<double>(m);
    }

    Gradients out;
    // dW1 = P2^T g
    gemm_at_b(cache.p2, g, n, h, 1, out.w1);

    // dZ1 = (A_hat g) W1^T masked by relu'(Z1); A_hat is symmetric
    std::vector<double> ag;
    spmm(a_hat, g, 1, ag);
    std::vector<double> dz1(n * h);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t r = 0; r < h; ++r)
            dz1[i * h + r] = cache.z1[i * h + r] > 0.0 ? ag[i] * model.w1[r] : 0.0;

    // dW0 = P1^T dZ1
    gemm_at_b(cache.p1, dz1, n, kFeatureCount, h, out.w0);
    return out;
}

}  // namespace

CsrMatrix renormalize_adjacency(const CsrMatrix& a) {
    validate(a);
    if (a.rows != a.cols) throw ValidationError("adjacency must be square");

    const auto n = static_cast<std::size_t>(a.rows);
    std::vector<double> deg(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (auto k = a.row_offsets[i]; k < a.row_offsets[i + 1]; ++k) {
            const double w = a.values[static_cast<std::size_t>(k)];
            if (w < 0.0) throw ValidationError("adjacency weights must be non-negative");
            if (a.col_indices[static_cast<std::size_t>(k)] == static_cast<std::int32_t>(i))
                throw ValidationError("adjacency diagonal must be empty");
            deg[i] += w;
        }
        deg[i] += 1.0;  // the self loop from A + I
    }

    CsrMatrix out;
    out.rows = out.cols = a.rows;
    out.row_offsets.resize(n + 1);
    out.row_offsets[0] = 0;
    const auto nnz = static_cast<std::size_t>(a.nnz());
    out.col_indices.reserve(nnz + n);
    out.values.reserve(nnz + n);
    for (std::size_t i = 0; i < n; ++i) {
        const double di = 1.0 / std::sqrt(deg[i]);
        bool self_done = false;
        auto push_self = [&] {
            out.col_indices.push_back(static_cast<std::int32_t>(i));
            out.values.push_back(di * di);
            self_done = true;
        };
        for (auto k = a.row_offsets[i]; k < a.row_offsets[i + 1]; ++k) {
            const auto j = a.col_indices[static_cast<std::size_t>(k)];
            if (!self_done && j > static_cast<std::int32_t>(i)) push_self();
            out.col_indices.push_back(j);
            // w * (di * dj) keeps the (i,j) and (j,i) entries bitwise equal
            const double dj = 1.0 / std::sqrt(deg[static_cast<std::size_t>(j)]);
            out.values.push_back(a.values[static_cast<std::size_t>(k)] * (di * dj));
        }
        if (!self_done) push_self();
        out.row_offsets[i + 1] = static_cast<std::int64_t>(out.col_indices.size());
    }
    return out;
}

std::vector<double> forward(const GcnModel& model, const CsrMatrix& a_hat,
                            const std::vector<double>& x) {
    auto probs = forward_logits(model, a_hat, x);
    for (auto& v : probs) v = sigmoid(v);
    return probs;
}

std::vector<double> forward_logits(const GcnModel& model, const CsrMatrix& a_hat,
                                   const std::vector<double>& x) {
    ForwardCache cache;
    run_forward(model, a_hat, x, cache);
    return std::move(cache.logits);
}

double masked_bce(const std::vector<double>& probs, const std::vector<int>& labels) {
    if (probs.size() != labels.size()) throw ValidationError("probs/labels size mismatch");
    const std::size_t m = count_labeled(labels);
    if (m == 0) throw ValidationError("loss needs at least one labeled node");

    double sum = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (labels[i] == kUnlabeled) continue;
        const double p = std::min(std::max(probs[i], kProbEps), 1.0 - kProbEps);
        sum += labels[i] == kLabelForeground ? -std::log(p) : -std::log(1.0 - p);
    }
    return sum / static_cast<double>(m);
}

double masked_bce_from_logits(const std::vector<double>& logits,
                              const std::vector<int>& labels) {
    if (logits.size() != labels.size()) throw ValidationError("logits/labels size mismatch");
    const std::size_t m = count_labeled(labels);
    if (m == 0) throw ValidationError("loss needs at least one labeled node");

    // -y z + log(1 + e^z), evaluated as max(z,0) - y z + log1p(e^{-|z|})
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        if (labels[i] == kUnlabeled) continue;
        const double z = logits[i];
        const double y = labels[i] == kLabelForeground ? 1.0 : 0.0;
        sum += std::max(z, 0.0) - y * z + std::log1p(std::exp(-std::abs(z)));
    }
    return sum / static_cast<double>(m);
}

Gradients gradients(const GcnModel& model, const CsrMatrix& a_hat,
                    const std::vector<double>& x, const std::vector<int>& labels) {
    if (labels.size() != static_cast<std::size_t>(a_hat.rows))
        throw ValidationError("labels size does not match the graph");
    const std::size_t m = count_labeled(labels);
    if (m == 0) throw ValidationError("gradients need at least one labeled node");

    ForwardCache cache;
    run_forward(model, a_hat, x, cache);
    return backward(model, a_hat, labels, m, cache);
}

GcnModel init_model(int hidden, std::uint64_t seed) {
    if (hidden <= 0) throw ValidationError("hidden size must be positive");
    GcnModel model;
    model.hidden = hidden;
    model.w0.resize(static_cast<std::size_t>(kFeatureCount) * hidden);
    model.w1.resize(static_cast<std::size_t>(hidden));

    Rng rng(mix_seed(seed, 101));
    const double b0 = std::sqrt(6.0 / (kFeatureCount + hidden));
    for (auto& w : model.w0) w = rng.uniform(-b0, b0);
    const double b1 = std::sqrt(6.0 / (hidden + 1));
    for (auto& w : model.w1) w = rng.uniform(-b1, b1);
    return model;
}

GcnModel train(const RefinementGraph& graph, const TrainConfig& cfg, TrainTrace* trace) {
    if (cfg.epochs <= 0) throw ValidationError("epochs must be positive");
    if (cfg.learning_rate <= 0.0) throw ValidationError("learning rate must be positive");
    std::size_t fg = 0, bg = 0;
    count_labeled(graph.labels, &fg, &bg);
    if (fg == 0 || bg == 0)
        throw DegenerateLabelsError("training needs labeled nodes of both classes");

    const CsrMatrix a_hat = renormalize_adjacency(graph.adjacency);
    GcnModel model = init_model(cfg.hidden, cfg.seed);

    // Adam state, one slot per parameter
    std::vector<double> m0(model.w0.size(), 0.0), v0(model.w0.size(), 0.0);
    std::vector<double> m1(model.w1.size(), 0.0), v1(model.w1.size(), 0.0);
    if (trace) trace->loss_per_epoch.clear();

    const std::size_t labeled = fg + bg;
    ForwardCache cache;
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        run_forward(model, a_hat, graph.features, cache);
        if (trace)
            trace->loss_per_epoch.push_back(
                masked_bce_from_logits(cache.logits, graph.labels));
        const Gradients grads = backward(model, a_hat, graph.labels, labeled, cache);

        const double bias1 = 1.0 - std::pow(cfg.adam_beta1, epoch);
        const double bias2 = 1.0 - std::pow(cfg.adam_beta2, epoch);
        auto step = [&](std::vector<double>& w, const std::vector<double>& g,
                        std::vector<double>& m, std::vector<double>& v) {
            for (std::size_t i = 0; i < w.size(); ++i) {
                m[i] = cfg.adam_beta1 * m[i] + (1.0 - cfg.adam_beta1) * g[i];
                v[i] = cfg.adam_beta2 * v[i] + (1.0 - cfg.adam_beta2) * g[i] * g[i];
                const double mhat = m[i] / bias1;
                const double vhat = v[i] / bias2;
                w[i] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.adam_eps);
            }
        };
        step(model.w0, grads.w0, m0, v0);
        step(model.w1, grads.w1, m1, v1);
    }
    return model;
}

std::vector<int> predict(const GcnModel& model, const RefinementGraph& graph) {
    const CsrMatrix a_hat = renormalize_adjacency(graph.adjacency);
    const auto probs = forward(model, a_hat, graph.features);
    std::vector<int> out(probs.size());
    for (std::size_t i = 0; i < probs.size(); ++i) out[i] = probs[i] > 0.5 ? 1 : 0;
    return out;
}

void save_model(const GcnModel& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write model: " + path.string());
    const char magic[4] = {'G', 'M', 'D', 'L'};
    out.write(magic, 4);
    const std::int32_t features = kFeatureCount;
    const std::int32_t hidden = model.hidden;
    out.write(reinterpret_cast<const char*>(&features), sizeof(features));
    out.write(reinterpret_cast<const char*>(&hidden), sizeof(hidden));
    out.write(reinterpret_cast<const char*>(model.w0.data()),
              static_cast<std::streamsize>(model.w0.size() * sizeof(double)));
    out.write(reinterpret_cast<const char*>(model.w1.data()),
              static_cast<std::streamsize>(model.w1.size() * sizeof(double)));
    if (!out) throw IoError("short write on " + path.string());
}

GcnModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open model: " + path.string());
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "GMDL", 4) != 0)
        throw ValidationError("not a model checkpoint: " + path.string());
    std::int32_t features = 0, hidden = 0;
    in.read(reinterpret_cast<char*>(&features), sizeof(features));
    in.read(reinterpret_cast<char*>(&hidden), sizeof(hidden));
    if (!in || features != kFeatureCount || hidden <= 0)
        throw ValidationError("bad model header in " + path.string());

    GcnModel model;
    model.hidden = hidden;
    model.w0.resize(static_cast<std::size_t>(features) * hidden);
    model.w1.resize(static_cast<std::size_t>(hidden));
    in.read(reinterpret_cast<char*>(model.w0.data()),
            static_cast<std::streamsize>(model.w0.size() * sizeof(double)));
    in.read(reinterpret_cast<char*>(model.w1.data()),
            static_cast<std::streamsize>(model.w1.size() * sizeof(double)));
    if (!in) throw IoError("short read on " + path.string());
    return model;
}

}  // namespace gcnref
