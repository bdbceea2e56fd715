// network.hpp — small fully-connected networks with manual backprop.
//
// The forward pass records everything backward needs (pre-activations,
// activations, dropout masks), so gradients are exact for the traced pass.
// Train mode applies inverted dropout to hidden activations; Eval mode is a
// pure function of (net, x).

#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "seplab/core.hpp"

namespace seplab {

enum class Activation : std::uint8_t { ReLU = 0, Identity = 1 };
enum class Mode { Train, Eval };

struct LayerSpec {
    std::size_t width = 1;
    Activation activation = Activation::ReLU;
};

struct Layer {
    std::size_t in = 0;
    std::size_t out = 0;
    Activation activation = Activation::Identity;
    std::vector<double> weights;  // out x in, row-major
    Vector biases;                // out

    bool operator==(const Layer&) const = default;
};

struct Network {
    std::vector<Layer> layers;
    std::size_t input_dim = 0;
    int class_count = 0;
    double dropout_rate = 0.0;

    bool operator==(const Network&) const = default;

    std::size_t param_count() const {
        std::size_t n = 0;
        for (const auto& l : layers) n += l.weights.size() + l.biases.size();
        return n;
    }
};

struct ForwardTrace {
    Vector input;
    std::vector<Vector> pre;                 // z per layer
    std::vector<Vector> post;                // activation (and dropout) output
    std::vector<std::vector<double>> masks;  // per-layer dropout scales; empty rows in Eval
    Mode mode = Mode::Eval;
    std::size_t input_dim = 0;
    std::vector<std::size_t> widths;
};

struct LayerGrad {
    std::vector<double> dw;
    Vector db;
};

using ParamGrads = std::vector<LayerGrad>;

inline ParamGrads zero_grads(const Network& net) {
    ParamGrads g(net.layers.size());
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        g[l].dw.assign(net.layers[l].weights.size(), 0.0);
        g[l].db.assign(net.layers[l].biases.size(), 0.0);
    }
    return g;
}

// Glorot-uniform weights, zero biases; deterministic per seed. The final
// layer must be Identity: its width is the logit count.
inline Network init_network(const std::vector<LayerSpec>& specs,
                            std::size_t input_dim, std::uint64_t seed) {
    if (specs.empty()) throw InputError("init_network: need at least one layer");
    if (input_dim < 1) throw InputError("init_network: input_dim must be >= 1");
    for (const auto& s : specs)
        if (s.width < 1) throw InputError("init_network: layer width must be >= 1");
    if (specs.back().activation != Activation::Identity)
        throw InputError("init_network: final layer must be Identity (logits)");

    Network net;
    net.input_dim = input_dim;
    net.class_count = static_cast<int>(specs.back().width);
    RandomStream rng(seed);
    std::size_t fan_in = input_dim;
    for (const auto& s : specs) {
        Layer layer;
        layer.in = fan_in;
        layer.out = s.width;
        layer.activation = s.activation;
        layer.weights.resize(layer.out * layer.in);
        layer.biases.assign(layer.out, 0.0);
        const double a = std::sqrt(6.0 / double(fan_in + s.width));
        for (double& w : layer.weights) w = rng.uniform(-a, a);
        net.layers.push_back(std::move(layer));
        fan_in = s.width;
    }
    return net;
}

// Affine-activation chain with inverted dropout on hidden activations in
// Train mode (masks drawn from rng, scaled by 1/(1-rate) so Eval needs no
// rescaling). rng may be null when mode is Eval or dropout_rate is 0.
inline Vector forward(const Network& net, const Vector& x, Mode mode,
                      RandomStream* rng, ForwardTrace* trace = nullptr) {
    if (x.size() != net.input_dim)
        throw InputError("forward: input dimension mismatch");
    const bool dropping = mode == Mode::Train && net.dropout_rate > 0.0;
    if (dropping && rng == nullptr)
        throw InputError("forward: Train mode with dropout needs an rng");

    if (trace) {
        trace->input = x;
        trace->pre.assign(net.layers.size(), {});
        trace->post.assign(net.layers.size(), {});
        trace->masks.assign(net.layers.size(), {});
        trace->mode = mode;
        trace->input_dim = net.input_dim;
        trace->widths.clear();
        for (const auto& l : net.layers) trace->widths.push_back(l.out);
    }

    Vector act = x;
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        const Layer& layer = net.layers[l];
        Vector z(layer.out);
        for (std::size_t i = 0; i < layer.out; ++i) {
            double sum = layer.biases[i];
            const double* row = layer.weights.data() + i * layer.in;
            for (std::size_t j = 0; j < layer.in; ++j) sum += row[j] * act[j];
            z[i] = sum;
        }
        Vector a(layer.out);
        for (std::size_t i = 0; i < layer.out; ++i)
            a[i] = layer.activation == Activation::ReLU ? std::max(0.0, z[i]) : z[i];

        const bool hidden = l + 1 < net.layers.size();
        std::vector<double> mask;
        if (dropping && hidden) {
            mask.resize(layer.out);
            const double keep = 1.0 - net.dropout_rate;
            for (std::size_t i = 0; i < layer.out; ++i) {
                mask[i] = rng->uniform() < keep ? 1.0 / keep : 0.0;
                a[i] *= mask[i];
            }
        }

        if (trace) {
            trace->pre[l] = z;
            trace->post[l] = a;
            trace->masks[l] = std::move(mask);
        }
        act = std::move(a);
    }

    for (double v : act)
        if (!std::isfinite(v))
            throw NumericError("forward: non-finite logits (diverged parameters?)");
    return act;
}

inline Vector logits_eval(const Network& net, const Vector& x) {
    return forward(net, x, Mode::Eval, nullptr, nullptr);
}

struct BackwardResult {
    ParamGrads param_grads;
    Vector input_grad;
};

namespace detail {

inline void check_trace(const Network& net, const ForwardTrace& trace,
                        const Vector& upstream) {
    if (trace.input_dim != net.input_dim || trace.widths.size() != net.layers.size())
        throw InputError("backward: trace does not match network architecture");
    for (std::size_t l = 0; l < net.layers.size(); ++l)
        if (trace.widths[l] != net.layers[l].out)
            throw InputError("backward: trace does not match network architecture");
    if (upstream.size() != net.layers.back().biases.size())
        throw InputError("backward: upstream size must match logit count");
}

}  // namespace detail

// Exact reverse-mode gradients for the traced pass, dropout masks included.
// ReLU subgradient at exactly 0 is taken as 0. Parameter gradients accumulate
// into `acc` (which must be zero_grads-shaped); pass params=false to skip
// them when only the input gradient is wanted.
inline Vector backward_accumulate(const Network& net, const ForwardTrace& trace,
                                  const Vector& upstream, ParamGrads* acc) {
    detail::check_trace(net, trace, upstream);

    Vector delta = upstream;  // dL/d(post activations of current layer)
    for (std::size_t li = net.layers.size(); li-- > 0;) {
        const Layer& layer = net.layers[li];
        const Vector& z = trace.pre[li];
        const Vector& below = li == 0 ? trace.input : trace.post[li - 1];
        const auto& mask = trace.masks[li];

        Vector dz(layer.out);
        for (std::size_t i = 0; i < layer.out; ++i) {
            double g = delta[i];
            if (!mask.empty()) g *= mask[i];
            if (layer.activation == Activation::ReLU && z[i] <= 0.0) g = 0.0;
            dz[i] = g;
        }

        if (acc) {
            auto& grad = (*acc)[li];
            for (std::size_t i = 0; i < layer.out; ++i) {
                const double g = dz[i];
                if (g == 0.0) continue;
                double* dw_row = grad.dw.data() + i * layer.in;
                for (std::size_t j = 0; j < layer.in; ++j) dw_row[j] += g * below[j];
                grad.db[i] += g;
            }
        }

        Vector next(layer.in, 0.0);
        for (std::size_t i = 0; i < layer.out; ++i) {
            const double g = dz[i];
            if (g == 0.0) continue;
            const double* row = layer.weights.data() + i * layer.in;
            for (std::size_t j = 0; j < layer.in; ++j) next[j] += row[j] * g;
        }
        delta = std::move(next);
    }
    return delta;
}

inline BackwardResult backward(const Network& net, const ForwardTrace& trace,
                               const Vector& upstream) {
    BackwardResult res;
    res.param_grads = zero_grads(net);
    res.input_grad = backward_accumulate(net, trace, upstream, &res.param_grads);
    return res;
}

inline Vector backward_input_only(const Network& net, const ForwardTrace& trace,
                                  const Vector& upstream) {
    return backward_accumulate(net, trace, upstream, nullptr);
}

struct GradCheckReport {
    double max_rel_err = 0.0;
    std::size_t coords_checked = 0;
    bool passed = false;
};

namespace detail {

inline double* param_ptr(Network& net, std::size_t flat) {
    for (auto& layer : net.layers) {
        if (flat < layer.weights.size()) return &layer.weights[flat];
        flat -= layer.weights.size();
        if (flat < layer.biases.size()) return &layer.biases[flat];
        flat -= layer.biases.size();
    }
    return nullptr;
}

inline double grad_entry(const ParamGrads& grads, std::size_t flat) {
    for (const auto& g : grads) {
        if (flat < g.dw.size()) return g.dw[flat];
        flat -= g.dw.size();
        if (flat < g.db.size()) return g.db[flat];
        flat -= g.db.size();
    }
    return 0.0;
}

}  // namespace detail

// Central-difference check of backward() on the scalar sum_b u_b . f(x_b),
// with fixed random probe vectors u. Checks every parameter and input
// coordinate, or a seeded random subset of at least min_coords when the net
// is large. Points with a pre-activation exactly at a ReLU kink are the
// caller's responsibility to avoid (random inputs avoid them a.s.).
inline GradCheckReport grad_check(const Network& net,
                                  const std::vector<Vector>& batch, double step,
                                  double tol, std::size_t min_coords = 200) {
    if (!(tol > 0.0)) throw InputError("grad_check: tol must be > 0");
    if (!(step > 0.0)) throw InputError("grad_check: step must be > 0");
    if (batch.empty()) throw InputError("grad_check: empty batch");

    RandomStream rng(0x6A09E667F3BCC908ULL);
    std::vector<Vector> probes;
    for (std::size_t b = 0; b < batch.size(); ++b) {
        Vector u(net.layers.back().biases.size());
        for (double& v : u) v = rng.uniform(-1.0, 1.0);
        probes.push_back(std::move(u));
    }

    auto scalar = [&](const Network& n) {
        double total = 0.0;
        for (std::size_t b = 0; b < batch.size(); ++b) {
            const Vector out = forward(n, batch[b], Mode::Eval, nullptr);
            for (std::size_t i = 0; i < out.size(); ++i)
                total += probes[b][i] * out[i];
        }
        return total;
    };

    ParamGrads analytic = zero_grads(net);
    std::vector<Vector> input_grads;
    for (std::size_t b = 0; b < batch.size(); ++b) {
        ForwardTrace trace;
        forward(net, batch[b], Mode::Eval, nullptr, &trace);
        auto res = backward(net, trace, probes[b]);
        for (std::size_t l = 0; l < analytic.size(); ++l) {
            for (std::size_t k = 0; k < analytic[l].dw.size(); ++k)
                analytic[l].dw[k] += res.param_grads[l].dw[k];
            for (std::size_t k = 0; k < analytic[l].db.size(); ++k)
                analytic[l].db[k] += res.param_grads[l].db[k];
        }
        input_grads.push_back(std::move(res.input_grad));
    }

    const std::size_t n_params = net.param_count();
    std::vector<std::size_t> param_coords;
    if (n_params <= min_coords) {
        for (std::size_t k = 0; k < n_params; ++k) param_coords.push_back(k);
    } else {
        for (std::size_t k = 0; k < min_coords; ++k)
            param_coords.push_back(rng.uniform_int(n_params));
    }

    GradCheckReport report;
    Network work = net;
    for (std::size_t flat : param_coords) {
        double* p = detail::param_ptr(work, flat);
        const double saved = *p;
        *p = saved + step;
        const double hi = scalar(work);
        *p = saved - step;
        const double lo = scalar(work);
        *p = saved;
        const double fd = (hi - lo) / (2.0 * step);
        const double an = detail::grad_entry(analytic, flat);
        const double rel = std::abs(an - fd) / std::max({std::abs(an), std::abs(fd), 1.0});
        report.max_rel_err = std::max(report.max_rel_err, rel);
        ++report.coords_checked;
    }

    for (std::size_t b = 0; b < batch.size(); ++b) {
        Vector x = batch[b];
        for (std::size_t k = 0; k < x.size(); ++k) {
            const double saved = x[k];
            x[k] = saved + step;
            double hi = 0.0;
            {
                const Vector out = forward(net, x, Mode::Eval, nullptr);
                for (std::size_t i = 0; i < out.size(); ++i) hi += probes[b][i] * out[i];
            }
            x[k] = saved - step;
            double lo = 0.0;
            {
                const Vector out = forward(net, x, Mode::Eval, nullptr);
                for (std::size_t i = 0; i < out.size(); ++i) lo += probes[b][i] * out[i];
            }
            x[k] = saved;
            const double fd = (hi - lo) / (2.0 * step);
            const double an = input_grads[b][k];
            const double rel =
                std::abs(an - fd) / std::max({std::abs(an), std::abs(fd), 1.0});
            report.max_rel_err = std::max(report.max_rel_err, rel);
            ++report.coords_checked;
        }
    }

    report.passed = report.max_rel_err < tol;
    return report;
}

// Model file: magic "SEPLABNN", version 1, little-endian u64 input_dim,
// u32 layer count, f64 dropout_rate, then per layer u64 width, u8 activation,
// f64 weights row-major, f64 biases. Round-trips bit-exactly.
inline void save_model(const Network& net, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot open for writing: " + path);
    out.write("SEPLABNN", 8);
    detail::write_le<std::uint8_t>(out, 1);
    detail::write_le<std::uint64_t>(out, net.input_dim);
    detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(net.layers.size()));
    detail::write_le<double>(out, net.dropout_rate);
    for (const auto& layer : net.layers) {
        detail::write_le<std::uint64_t>(out, layer.out);
        detail::write_le<std::uint8_t>(out, static_cast<std::uint8_t>(layer.activation));
        out.write(reinterpret_cast<const char*>(layer.weights.data()),
                  static_cast<std::streamsize>(layer.weights.size() * sizeof(double)));
        out.write(reinterpret_cast<const char*>(layer.biases.data()),
                  static_cast<std::streamsize>(layer.biases.size() * sizeof(double)));
    }
    if (!out) throw FormatError("write failed: " + path);
}

inline Network load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open model file: " + path);
    char magic[8];
    if (!in.read(magic, 8) || std::memcmp(magic, "SEPLABNN", 8) != 0)
        throw FormatError("bad magic in model file: " + path);
    const auto version = detail::read_le<std::uint8_t>(in, "version");
    if (version != 1)
        throw FormatError("unsupported model version " + std::to_string(version) +
                          " in " + path);
    Network net;
    net.input_dim = detail::read_le<std::uint64_t>(in, "input_dim");
    const auto n_layers = detail::read_le<std::uint32_t>(in, "layer count");
    net.dropout_rate = detail::read_le<double>(in, "dropout rate");
    std::size_t fan_in = net.input_dim;
    for (std::uint32_t l = 0; l < n_layers; ++l) {
        Layer layer;
        layer.in = fan_in;
        layer.out = detail::read_le<std::uint64_t>(in, "layer width");
        const auto act = detail::read_le<std::uint8_t>(in, "activation tag");
        if (act > 1)
            throw FormatError("unknown activation tag " + std::to_string(act) +
                              " in " + path);
        layer.activation = static_cast<Activation>(act);
        layer.weights.resize(layer.out * layer.in);
        layer.biases.resize(layer.out);
        if (!in.read(reinterpret_cast<char*>(layer.weights.data()),
                     static_cast<std::streamsize>(layer.weights.size() * sizeof(double))) ||
            !in.read(reinterpret_cast<char*>(layer.biases.data()),
                     static_cast<std::streamsize>(layer.biases.size() * sizeof(double))))
            throw FormatError("truncated model file: " + path);
        fan_in = layer.out;
        net.layers.push_back(std::move(layer));
    }
    net.class_count = static_cast<int>(fan_in);
    return net;
}

}  // namespace seplab
