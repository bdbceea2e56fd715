// training.hpp — robust training objectives and the SGD training loop.
//
// Six objectives: Natural, AT, TRADES, RST, GR, LLR. Inner maximizers run in
// Eval mode with per-example derived seeds; the outer update pass runs in the
// caller's mode (Train during optimization, so dropout masks apply). Stop-
// gradient conventions: AT/RST do not differentiate through the inner argmax
// (Danskin), TRADES differentiates both KL arguments at the found point, GR
// freezes the probe direction, LLR freezes delta and realizes the directional
// derivative as a central finite difference so its parameter gradient is
// exact for the implemented expression.
//
// Zero-coefficient shortcuts (beta=0, lambda=0, ...) skip the extra passes
// entirely, so they equal Natural bit-for-bit on the same batch and seeds.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "seplab/attacks.hpp"
#include "seplab/core.hpp"
#include "seplab/dataset.hpp"
#include "seplab/lipschitz.hpp"
#include "seplab/network.hpp"

namespace seplab {

enum class MethodKind { Natural, AT, Trades, RST, GR, LLR };

inline const char* method_name(MethodKind k) {
    switch (k) {
        case MethodKind::Natural: return "natural";
        case MethodKind::AT: return "at";
        case MethodKind::Trades: return "trades";
        case MethodKind::RST: return "rst";
        case MethodKind::GR: return "gr";
        case MethodKind::LLR: return "llr";
    }
    return "?";
}

inline MethodKind method_from_name(const std::string& s) {
    if (s == "natural") return MethodKind::Natural;
    if (s == "at") return MethodKind::AT;
    if (s == "trades") return MethodKind::Trades;
    if (s == "rst") return MethodKind::RST;
    if (s == "gr") return MethodKind::GR;
    if (s == "llr") return MethodKind::LLR;
    throw InputError("unknown training method '" + s + "'");
}

struct TrainMethod {
    MethodKind kind = MethodKind::Natural;
    double beta = 0.0;        // TRADES / GR weight
    double lambda = 0.0;      // RST / LLR weight
    double mu = 0.0;          // LLR directional-gradient weight
    double fd_step = 0.01;    // GR probe step h
    double fd_scale = 1e-3;   // LLR directional-derivative step tau
    AttackConfig inner;       // inner maximizer schedule (AT/TRADES/RST/LLR)
};

struct LossResult {
    double loss = 0.0;
    ParamGrads grads;
};

namespace detail {

inline void accumulate(ParamGrads& acc, const ParamGrads& g, double scale) {
    for (std::size_t l = 0; l < acc.size(); ++l) {
        for (std::size_t k = 0; k < acc[l].dw.size(); ++k)
            acc[l].dw[k] += scale * g[l].dw[k];
        for (std::size_t k = 0; k < acc[l].db.size(); ++k)
            acc[l].db[k] += scale * g[l].db[k];
    }
}

inline Vector scaled(const Vector& v, double s) {
    Vector out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = s * v[i];
    return out;
}

// Examples are processed in fixed chunks of 8: each chunk accumulates its
// gradients in example order into one buffer, and chunks combine in order.
// The association is independent of scheduling, so results are
// bit-reproducible for any thread count.
inline constexpr std::size_t kGradChunk = 8;

template <typename PerExampleFn>
LossResult chunked_loss(const Network& net, std::size_t n, PerExampleFn&& fn) {
    const std::size_t n_chunks = (n + kGradChunk - 1) / kGradChunk;
    std::vector<double> chunk_loss(n_chunks, 0.0);
    std::vector<ParamGrads> chunk_grads(n_chunks);

#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t ci = 0; ci < static_cast<std::ptrdiff_t>(n_chunks); ++ci) {
        const auto c = static_cast<std::size_t>(ci);
        chunk_grads[c] = zero_grads(net);
        const std::size_t hi = std::min(n, (c + 1) * kGradChunk);
        for (std::size_t i = c * kGradChunk; i < hi; ++i)
            chunk_loss[c] += fn(i, chunk_grads[c]);
    }

    LossResult res;
    res.grads = std::move(chunk_grads[0]);
    res.loss = chunk_loss[0];
    for (std::size_t c = 1; c < n_chunks; ++c) {
        res.loss += chunk_loss[c];
        accumulate(res.grads, chunk_grads[c], 1.0);
    }
    const double inv = 1.0 / static_cast<double>(n);
    res.loss *= inv;
    for (auto& l : res.grads) {
        for (double& v : l.dw) v *= inv;
        for (double& v : l.db) v *= inv;
    }
    return res;
}

inline RandomStream* mask_rng(Mode mode, const Network& net, RandomStream& rng) {
    return mode == Mode::Train && net.dropout_rate > 0.0 ? &rng : nullptr;
}

}  // namespace detail

// Mean softmax cross-entropy. Per-example dropout masks derive from
// (dropout_seed, example index) in Train mode.
inline LossResult loss_natural(const Network& net, const std::vector<Vector>& xs,
                               const std::vector<int>& ys, Mode mode,
                               std::uint64_t dropout_seed) {
    if (xs.empty() || xs.size() != ys.size())
        throw InputError("loss_natural: bad batch");
    RandomStream base(dropout_seed);
    return detail::chunked_loss(net, xs.size(), [&](std::size_t i, ParamGrads& acc) {
        RandomStream rng = base.derive(i);
        ForwardTrace trace;
        const Vector z =
            forward(net, xs[i], mode, detail::mask_rng(mode, net, rng), &trace);
        backward_accumulate(net, trace, cross_entropy_grad(z, ys[i]), &acc);
        return cross_entropy(z, ys[i]);
    });
}

// Inner maximizer for AT and RST: per-example PGD on the cross-entropy.
inline std::vector<Vector> find_at_points(const Network& net,
                                          const std::vector<Vector>& xs,
                                          const std::vector<int>& ys,
                                          const AttackConfig& inner,
                                          std::uint64_t inner_seed) {
    std::vector<Vector> adv(xs.size());
    RandomStream base(inner_seed);
#pragma omp parallel for schedule(dynamic, 4)
    for (std::ptrdiff_t bi = 0; bi < static_cast<std::ptrdiff_t>(xs.size()); ++bi) {
        const auto i = static_cast<std::size_t>(bi);
        AttackConfig cfg = inner;
        cfg.seed = base.derive(i).seed();
        adv[i] = pgd(net, xs[i], ys[i], cfg).adversarial_point;
    }
    return adv;
}

// AT objective at frozen inner points: plain cross-entropy on them.
inline LossResult loss_at_frozen(const Network& net, const std::vector<Vector>& adv,
                                 const std::vector<int>& ys, Mode mode,
                                 std::uint64_t dropout_seed) {
    return loss_natural(net, adv, ys, mode, dropout_seed);
}

inline LossResult loss_at(const Network& net, const std::vector<Vector>& xs,
                          const std::vector<int>& ys, const AttackConfig& inner,
                          Mode mode, std::uint64_t dropout_seed,
                          std::uint64_t inner_seed) {
    if (inner.epsilon == 0.0) return loss_natural(net, xs, ys, mode, dropout_seed);
    const auto adv = find_at_points(net, xs, ys, inner, inner_seed);
    return loss_at_frozen(net, adv, ys, mode, dropout_seed);
}

namespace detail {

inline Vector log_softmax(const Vector& z) {
    double m = z[0];
    for (double v : z) m = std::max(m, v);
    double lse = 0.0;
    for (double v : z) lse += std::exp(v - m);
    const double norm = std::log(lse) + m;
    Vector out(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) out[i] = z[i] - norm;
    return out;
}

// KL(softmax(z) || softmax(z_adv)) with upstream gradients for both logit
// vectors.
struct KlParts {
    double kl = 0.0;
    Vector up_clean;
    Vector up_adv;
};

inline KlParts kl_divergence(const Vector& z, const Vector& z_adv) {
    const Vector lp = log_softmax(z);
    const Vector lq = log_softmax(z_adv);
    KlParts out;
    out.up_clean.resize(z.size());
    out.up_adv.resize(z.size());
    for (std::size_t i = 0; i < z.size(); ++i)
        out.kl += std::exp(lp[i]) * (lp[i] - lq[i]);
    for (std::size_t i = 0; i < z.size(); ++i) {
        const double p = std::exp(lp[i]);
        const double q = std::exp(lq[i]);
        out.up_clean[i] = p * ((lp[i] - lq[i]) - out.kl);
        out.up_adv[i] = q - p;
    }
    return out;
}

}  // namespace detail

// Inner maximizer for TRADES: signed-gradient ascent on
// KL(softmax f(x) || softmax f(x')) with the clean distribution fixed.
inline std::vector<Vector> find_trades_points(const Network& net,
                                              const std::vector<Vector>& xs,
                                              const AttackConfig& inner,
                                              std::uint64_t inner_seed) {
    std::vector<Vector> adv(xs.size());
    RandomStream base(inner_seed);
    const double step = inner.resolved_step();

#pragma omp parallel for schedule(dynamic, 4)
    for (std::ptrdiff_t bi = 0; bi < static_cast<std::ptrdiff_t>(xs.size()); ++bi) {
        const auto i = static_cast<std::size_t>(bi);
        RandomStream rng = base.derive(i);
        const Vector& x = xs[i];
        const Vector z0 = logits_eval(net, x);

        Vector point = inner.random_start
                           ? detail::random_ball_point(x, inner.epsilon, rng)
                           : x;
        Vector best_point = point;
        double best_kl = detail::kl_divergence(z0, logits_eval(net, point)).kl;
        for (int s = 0; s < inner.steps; ++s) {
            ForwardTrace trace;
            const Vector z = forward(net, point, Mode::Eval, nullptr, &trace);
            const auto kl = detail::kl_divergence(z0, z);
            const Vector grad = backward_input_only(net, trace, kl.up_adv);
            for (std::size_t k = 0; k < point.size(); ++k) {
                if (grad[k] > 0.0)
                    point[k] += step;
                else if (grad[k] < 0.0)
                    point[k] -= step;
            }
            point = clip_domain(project_ball(point, x, inner.epsilon, Metric::Linf),
                                0.0, 1.0);
            const double kl_now = detail::kl_divergence(z0, logits_eval(net, point)).kl;
            if (kl_now > best_kl) {
                best_kl = kl_now;
                best_point = point;
            }
        }
        adv[i] = best_point;
    }
    return adv;
}

// TRADES at frozen inner points: CE(f(x), y) + beta * KL(f(x) || f(x')),
// gradients through both KL arguments.
inline LossResult loss_trades_frozen(const Network& net,
                                     const std::vector<Vector>& xs,
                                     const std::vector<int>& ys,
                                     const std::vector<Vector>& adv, double beta,
                                     Mode mode, std::uint64_t dropout_seed) {
    RandomStream base(dropout_seed);
    return detail::chunked_loss(net, xs.size(), [&](std::size_t i, ParamGrads& acc) {
        RandomStream rng = base.derive(i);
        RandomStream* mrng = detail::mask_rng(mode, net, rng);

        ForwardTrace clean_trace;
        const Vector z = forward(net, xs[i], mode, mrng, &clean_trace);
        ForwardTrace adv_trace;
        const Vector z_adv = forward(net, adv[i], mode, mrng, &adv_trace);

        const auto kl = detail::kl_divergence(z, z_adv);
        Vector up_clean = cross_entropy_grad(z, ys[i]);
        for (std::size_t c = 0; c < up_clean.size(); ++c)
            up_clean[c] += beta * kl.up_clean[c];
        backward_accumulate(net, clean_trace, up_clean, &acc);
        backward_accumulate(net, adv_trace, detail::scaled(kl.up_adv, beta), &acc);
        return cross_entropy(z, ys[i]) + beta * kl.kl;
    });
}

inline LossResult loss_trades(const Network& net, const std::vector<Vector>& xs,
                              const std::vector<int>& ys, double beta,
                              const AttackConfig& inner, Mode mode,
                              std::uint64_t dropout_seed, std::uint64_t inner_seed) {
    if (beta < 0.0) throw InputError("loss_trades: beta must be >= 0");
    if (beta == 0.0) return loss_natural(net, xs, ys, mode, dropout_seed);
    const auto adv = find_trades_points(net, xs, inner, inner_seed);
    return loss_trades_frozen(net, xs, ys, adv, beta, mode, dropout_seed);
}

// RST at frozen inner points: CE(f(x), y) + lambda * CE(f(x'), y).
inline LossResult loss_rst_frozen(const Network& net, const std::vector<Vector>& xs,
                                  const std::vector<int>& ys,
                                  const std::vector<Vector>& adv, double lambda,
                                  Mode mode, std::uint64_t dropout_seed) {
    RandomStream base(dropout_seed);
    return detail::chunked_loss(net, xs.size(), [&](std::size_t i, ParamGrads& acc) {
        RandomStream rng = base.derive(i);
        RandomStream* mrng = detail::mask_rng(mode, net, rng);

        ForwardTrace clean_trace;
        const Vector z = forward(net, xs[i], mode, mrng, &clean_trace);
        ForwardTrace adv_trace;
        const Vector z_adv = forward(net, adv[i], mode, mrng, &adv_trace);

        backward_accumulate(net, clean_trace, cross_entropy_grad(z, ys[i]), &acc);
        backward_accumulate(net, adv_trace,
                            detail::scaled(cross_entropy_grad(z_adv, ys[i]), lambda),
                            &acc);
        return cross_entropy(z, ys[i]) + lambda * cross_entropy(z_adv, ys[i]);
    });
}

inline LossResult loss_rst(const Network& net, const std::vector<Vector>& xs,
                           const std::vector<int>& ys, double lambda,
                           const AttackConfig& inner, Mode mode,
                           std::uint64_t dropout_seed, std::uint64_t inner_seed) {
    if (lambda < 0.0) throw InputError("loss_rst: lambda must be >= 0");
    if (lambda == 0.0) return loss_natural(net, xs, ys, mode, dropout_seed);
    const auto adv = find_at_points(net, xs, ys, inner, inner_seed);
    return loss_rst_frozen(net, xs, ys, adv, lambda, mode, dropout_seed);
}

// Normalized input-gradient probe directions for GR; zero vector marks an
// example whose penalty is skipped (zero input gradient).
inline std::vector<Vector> gr_directions(const Network& net,
                                         const std::vector<Vector>& xs,
                                         const std::vector<int>& ys) {
    std::vector<Vector> dirs(xs.size());
#pragma omp parallel for schedule(dynamic, 4)
    for (std::ptrdiff_t bi = 0; bi < static_cast<std::ptrdiff_t>(xs.size()); ++bi) {
        const auto i = static_cast<std::size_t>(bi);
        ForwardTrace trace;
        const Vector z = forward(net, xs[i], Mode::Eval, nullptr, &trace);
        Vector g = backward_input_only(net, trace, cross_entropy_grad(z, ys[i]));
        double norm = 0.0;
        for (double v : g) norm += v * v;
        norm = std::sqrt(norm);
        if (norm > 0.0)
            for (double& v : g) v /= norm;
        else
            g.assign(g.size(), 0.0);
        dirs[i] = g;
    }
    return dirs;
}

// GR at frozen directions: CE + beta * ((CE(x + h d) - CE(x)) / h)^2.
inline LossResult loss_gr_frozen(const Network& net, const std::vector<Vector>& xs,
                                 const std::vector<int>& ys,
                                 const std::vector<Vector>& dirs, double beta,
                                 double fd_step, Mode mode,
                                 std::uint64_t dropout_seed) {
    if (!(fd_step > 0.0)) throw InputError("loss_gr: fd_step must be > 0");
    RandomStream base(dropout_seed);
    return detail::chunked_loss(net, xs.size(), [&](std::size_t i, ParamGrads& acc) {
        RandomStream rng = base.derive(i);
        RandomStream* mrng = detail::mask_rng(mode, net, rng);

        ForwardTrace trace0;
        const Vector z0 = forward(net, xs[i], mode, mrng, &trace0);
        const double ce0 = cross_entropy(z0, ys[i]);

        bool degenerate = true;
        for (double v : dirs[i])
            if (v != 0.0) degenerate = false;

        if (degenerate) {
            backward_accumulate(net, trace0, cross_entropy_grad(z0, ys[i]), &acc);
            return ce0;
        }

        Vector probe = xs[i];
        for (std::size_t k = 0; k < probe.size(); ++k) probe[k] += fd_step * dirs[i][k];
        ForwardTrace trace1;
        const Vector z1 = forward(net, probe, mode, mrng, &trace1);
        const double ce1 = cross_entropy(z1, ys[i]);

        const double fd = (ce1 - ce0) / fd_step;
        const double coef = 2.0 * beta * fd / fd_step;
        backward_accumulate(net, trace0,
                            detail::scaled(cross_entropy_grad(z0, ys[i]), 1.0 - coef),
                            &acc);
        backward_accumulate(net, trace1,
                            detail::scaled(cross_entropy_grad(z1, ys[i]), coef), &acc);
        return ce0 + beta * fd * fd;
    });
}

inline LossResult loss_gr(const Network& net, const std::vector<Vector>& xs,
                          const std::vector<int>& ys, double beta, double fd_step,
                          Mode mode, std::uint64_t dropout_seed) {
    if (beta < 0.0) throw InputError("loss_gr: beta must be >= 0");
    if (beta == 0.0) return loss_natural(net, xs, ys, mode, dropout_seed);
    const auto dirs = gr_directions(net, xs, ys);
    return loss_gr_frozen(net, xs, ys, dirs, beta, fd_step, mode, dropout_seed);
}

namespace detail {

// Local-linearity violation at a frozen delta. The directional derivative
// delta^T grad_x L is realized as a central difference with step tau so both
// its value and its parameter gradient come from plain forward/backward
// passes.
struct LlrEval {
    double ce = 0.0;      // CE at x
    double gap = 0.0;     // |CE(x+delta) - CE(x) - dirderiv|
    double dirderiv = 0.0;
};

}  // namespace detail

// Inner maximizer for LLR: ascend the linearity gap g(delta) over the ball.
inline std::vector<Vector> find_llr_deltas(const Network& net,
                                           const std::vector<Vector>& xs,
                                           const std::vector<int>& ys,
                                           const AttackConfig& inner,
                                           double fd_scale,
                                           std::uint64_t inner_seed) {
    std::vector<Vector> deltas(xs.size());
    RandomStream base(inner_seed);
    const double step = inner.resolved_step();
    const double tau = fd_scale;

#pragma omp parallel for schedule(dynamic, 4)
    for (std::ptrdiff_t bi = 0; bi < static_cast<std::ptrdiff_t>(xs.size()); ++bi) {
        const auto i = static_cast<std::size_t>(bi);
        RandomStream rng = base.derive(i);
        const Vector& x = xs[i];
        const int y = ys[i];
        const double ce0 = cross_entropy(logits_eval(net, x), y);

        auto clip_delta = [&](Vector delta) {
            Vector point(x.size());
            for (std::size_t k = 0; k < x.size(); ++k) point[k] = x[k] + delta[k];
            point = clip_domain(project_ball(point, x, inner.epsilon, Metric::Linf),
                                0.0, 1.0);
            for (std::size_t k = 0; k < x.size(); ++k) delta[k] = point[k] - x[k];
            return delta;
        };

        auto gap_at = [&](const Vector& delta) {
            Vector xp(x.size()), xt(x.size()), xm(x.size());
            for (std::size_t k = 0; k < x.size(); ++k) {
                xp[k] = x[k] + delta[k];
                xt[k] = x[k] + tau * delta[k];
                xm[k] = x[k] - tau * delta[k];
            }
            const double ce1 = cross_entropy(logits_eval(net, xp), y);
            const double dir = (cross_entropy(logits_eval(net, xt), y) -
                                cross_entropy(logits_eval(net, xm), y)) /
                               (2.0 * tau);
            return std::abs(ce1 - ce0 - dir);
        };

        Vector delta(x.size(), 0.0);
        if (inner.random_start) {
            for (double& v : delta) v = rng.uniform(-inner.epsilon, inner.epsilon);
            delta = clip_delta(std::move(delta));
        }
        Vector best_delta = delta;
        double best_gap = gap_at(delta);

        for (int s = 0; s < inner.steps; ++s) {
            Vector xp(x.size()), xt(x.size()), xm(x.size());
            for (std::size_t k = 0; k < x.size(); ++k) {
                xp[k] = x[k] + delta[k];
                xt[k] = x[k] + tau * delta[k];
                xm[k] = x[k] - tau * delta[k];
            }
            ForwardTrace tp, tt, tm;
            const Vector zp = forward(net, xp, Mode::Eval, nullptr, &tp);
            const Vector zt = forward(net, xt, Mode::Eval, nullptr, &tt);
            const Vector zm = forward(net, xm, Mode::Eval, nullptr, &tm);
            const double ce1 = cross_entropy(zp, y);
            const double dir =
                (cross_entropy(zt, y) - cross_entropy(zm, y)) / (2.0 * tau);
            const double inner_val = ce1 - ce0 - dir;
            const double sign = inner_val > 0.0 ? 1.0 : (inner_val < 0.0 ? -1.0 : 0.0);

            const Vector gp = backward_input_only(net, tp, cross_entropy_grad(zp, y));
            const Vector gt = backward_input_only(net, tt, cross_entropy_grad(zt, y));
            const Vector gm = backward_input_only(net, tm, cross_entropy_grad(zm, y));
            for (std::size_t k = 0; k < delta.size(); ++k) {
                const double g = sign * (gp[k] - 0.5 * (gt[k] + gm[k]));
                if (g > 0.0)
                    delta[k] += step;
                else if (g < 0.0)
                    delta[k] -= step;
            }
            delta = clip_delta(std::move(delta));
            const double gap = gap_at(delta);
            if (gap > best_gap) {
                best_gap = gap;
                best_delta = delta;
            }
        }
        deltas[i] = best_delta;
    }
    return deltas;
}

// LLR at frozen deltas:
//   CE(x) + lambda * |CE(x+delta) - CE(x) - t| + mu * |t|,
// where t = (CE(x + tau delta) - CE(x - tau delta)) / (2 tau).
inline LossResult loss_llr_frozen(const Network& net, const std::vector<Vector>& xs,
                                  const std::vector<int>& ys,
                                  const std::vector<Vector>& deltas, double lambda,
                                  double mu, double fd_scale, Mode mode,
                                  std::uint64_t dropout_seed) {
    if (!(fd_scale > 0.0)) throw InputError("loss_llr: fd_scale must be > 0");
    const double tau = fd_scale;
    RandomStream base(dropout_seed);
    return detail::chunked_loss(net, xs.size(), [&](std::size_t i, ParamGrads& acc) {
        RandomStream rng = base.derive(i);
        RandomStream* mrng = detail::mask_rng(mode, net, rng);
        const Vector& x = xs[i];
        const int y = ys[i];
        const Vector& delta = deltas[i];

        Vector xp(x.size()), xt(x.size()), xm(x.size());
        for (std::size_t k = 0; k < x.size(); ++k) {
            xp[k] = x[k] + delta[k];
            xt[k] = x[k] + tau * delta[k];
            xm[k] = x[k] - tau * delta[k];
        }

        ForwardTrace ta, tb, tc, td;
        const Vector za = forward(net, x, mode, mrng, &ta);
        const Vector zb = forward(net, xp, mode, mrng, &tb);
        const Vector zc = forward(net, xt, mode, mrng, &tc);
        const Vector zd = forward(net, xm, mode, mrng, &td);

        const double cea = cross_entropy(za, y);
        const double ceb = cross_entropy(zb, y);
        const double cec = cross_entropy(zc, y);
        const double ced = cross_entropy(zd, y);
        const double t = (cec - ced) / (2.0 * tau);
        const double inner_val = ceb - cea - t;
        const double s = inner_val > 0.0 ? 1.0 : (inner_val < 0.0 ? -1.0 : 0.0);
        const double st = t > 0.0 ? 1.0 : (t < 0.0 ? -1.0 : 0.0);

        const double ca = 1.0 - lambda * s;
        const double cb = lambda * s;
        const double cc = (-lambda * s + mu * st) / (2.0 * tau);
        const double cd = (lambda * s - mu * st) / (2.0 * tau);
        backward_accumulate(net, ta, detail::scaled(cross_entropy_grad(za, y), ca), &acc);
        backward_accumulate(net, tb, detail::scaled(cross_entropy_grad(zb, y), cb), &acc);
        backward_accumulate(net, tc, detail::scaled(cross_entropy_grad(zc, y), cc), &acc);
        backward_accumulate(net, td, detail::scaled(cross_entropy_grad(zd, y), cd), &acc);
        return cea + lambda * std::abs(inner_val) + mu * std::abs(t);
    });
}

inline LossResult loss_llr(const Network& net, const std::vector<Vector>& xs,
                           const std::vector<int>& ys, double lambda, double mu,
                           const AttackConfig& inner, double fd_scale, Mode mode,
                           std::uint64_t dropout_seed, std::uint64_t inner_seed) {
    if (lambda < 0.0 || mu < 0.0) throw InputError("loss_llr: weights must be >= 0");
    if (lambda == 0.0 && mu == 0.0)
        return loss_natural(net, xs, ys, mode, dropout_seed);
    const auto deltas = find_llr_deltas(net, xs, ys, inner, fd_scale, inner_seed);
    return loss_llr_frozen(net, xs, ys, deltas, lambda, mu, fd_scale, mode,
                           dropout_seed);
}

inline LossResult method_loss(const Network& net, const TrainMethod& method,
                              const std::vector<Vector>& xs,
                              const std::vector<int>& ys, Mode mode,
                              std::uint64_t dropout_seed, std::uint64_t inner_seed) {
    switch (method.kind) {
        case MethodKind::Natural:
            return loss_natural(net, xs, ys, mode, dropout_seed);
        case MethodKind::AT:
            return loss_at(net, xs, ys, method.inner, mode, dropout_seed, inner_seed);
        case MethodKind::Trades:
            return loss_trades(net, xs, ys, method.beta, method.inner, mode,
                               dropout_seed, inner_seed);
        case MethodKind::RST:
            return loss_rst(net, xs, ys, method.lambda, method.inner, mode,
                            dropout_seed, inner_seed);
        case MethodKind::GR:
            return loss_gr(net, xs, ys, method.beta, method.fd_step, mode,
                           dropout_seed);
        case MethodKind::LLR:
            return loss_llr(net, xs, ys, method.lambda, method.mu, method.inner,
                            method.fd_scale, mode, dropout_seed, inner_seed);
    }
    throw InputError("method_loss: unknown method");
}

struct TrainConfig {
    TrainMethod method;
    std::vector<std::size_t> hidden = {64, 64};  // hidden ReLU widths
    int epochs = 100;
    std::size_t batch_size = 32;
    double lr = 0.1;
    double momentum = 0.9;
    std::vector<int> decay_epochs;  // 1-based; lr *= decay_factor entering them
    double decay_factor = 0.1;
    double dropout_rate = 0.0;
    std::uint64_t seed = 0;
    bool include_test_in_train = false;
};

struct EpochStats {
    int epoch = 0;
    double lr = 0.0;
    double loss = 0.0;
    double train_acc = 0.0;
    double test_acc = 0.0;
};

struct TrainResult {
    Network net;
    std::vector<EpochStats> history;
};

struct ExperimentReport {
    double train_acc = 0.0;
    double test_acc = 0.0;
    double adv_train_acc = 0.0;
    double adv_test_acc = 0.0;
    double gap = 0.0;
    double adv_gap = 0.0;
    double test_lipschitz = 0.0;
};

// SGD with momentum (v = momentum v + g; w -= lr v) on shuffled mini-batches.
// Fully deterministic per config: init, shuffles, dropout masks and inner
// attacks all derive from cfg.seed.
inline TrainResult train(const TrainConfig& cfg, const Dataset& train_ds,
                         const Dataset& test_ds) {
    if (train_ds.d != test_ds.d) throw InputError("train: dataset dimension mismatch");
    if (train_ds.class_count != test_ds.class_count)
        throw InputError("train: dataset class count mismatch");
    if (!(cfg.lr > 0.0)) throw InputError("train: lr must be > 0");
    if (cfg.momentum < 0.0 || cfg.momentum >= 1.0)
        throw InputError("train: momentum must be in [0,1)");
    if (cfg.batch_size < 1) throw InputError("train: batch_size must be >= 1");
    if (cfg.epochs < 0) throw InputError("train: epochs must be >= 0");
    for (std::size_t i = 1; i < cfg.decay_epochs.size(); ++i)
        if (cfg.decay_epochs[i] <= cfg.decay_epochs[i - 1])
            throw InputError("train: decay_epochs must be strictly increasing");

    std::vector<LayerSpec> specs;
    for (std::size_t w : cfg.hidden) specs.push_back({w, Activation::ReLU});
    specs.push_back({static_cast<std::size_t>(train_ds.class_count),
                     Activation::Identity});

    RandomStream base(cfg.seed);
    TrainResult result;
    result.net = init_network(specs, train_ds.d, base.derive(0).seed());
    result.net.dropout_rate = cfg.dropout_rate;

    std::vector<Vector> pool_x;
    std::vector<int> pool_y;
    for (std::size_t i = 0; i < train_ds.n; ++i) {
        pool_x.push_back(train_ds.row_vec(i));
        pool_y.push_back(train_ds.labels[i]);
    }
    if (cfg.include_test_in_train) {
        for (std::size_t i = 0; i < test_ds.n; ++i) {
            pool_x.push_back(test_ds.row_vec(i));
            pool_y.push_back(test_ds.labels[i]);
        }
    }

    ParamGrads velocity = zero_grads(result.net);
    double lr = cfg.lr;
    std::vector<std::size_t> order(pool_x.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        for (int de : cfg.decay_epochs)
            if (de == epoch) lr *= cfg.decay_factor;

        RandomStream shuffle_rng = base.derive(1000000ULL + std::uint64_t(epoch));
        for (std::size_t i = 0; i + 1 < order.size(); ++i) {
            const std::size_t j = i + shuffle_rng.uniform_int(order.size() - i);
            std::swap(order[i], order[j]);
        }

        double epoch_loss = 0.0;
        std::size_t seen = 0;
        std::size_t batch_index = 0;
        for (std::size_t start = 0; start < order.size();
             start += cfg.batch_size, ++batch_index) {
            const std::size_t end = std::min(order.size(), start + cfg.batch_size);
            std::vector<Vector> xs;
            std::vector<int> ys;
            for (std::size_t k = start; k < end; ++k) {
                xs.push_back(pool_x[order[k]]);
                ys.push_back(pool_y[order[k]]);
            }
            RandomStream batch_rng =
                base.derive(2000000ULL + std::uint64_t(epoch)).derive(batch_index);
            const std::uint64_t dropout_seed = batch_rng.derive(0).seed();
            const std::uint64_t inner_seed = batch_rng.derive(1).seed();

            const LossResult lr_res = method_loss(result.net, cfg.method, xs, ys,
                                                  Mode::Train, dropout_seed,
                                                  inner_seed);
            if (!std::isfinite(lr_res.loss))
                throw NumericError("train: loss diverged (non-finite) at epoch " +
                                   std::to_string(epoch));
            epoch_loss += lr_res.loss * static_cast<double>(xs.size());
            seen += xs.size();

            for (std::size_t l = 0; l < result.net.layers.size(); ++l) {
                auto& layer = result.net.layers[l];
                auto& vel = velocity[l];
                const auto& g = lr_res.grads[l];
                for (std::size_t k = 0; k < layer.weights.size(); ++k) {
                    vel.dw[k] = cfg.momentum * vel.dw[k] + g.dw[k];
                    layer.weights[k] -= lr * vel.dw[k];
                }
                for (std::size_t k = 0; k < layer.biases.size(); ++k) {
                    vel.db[k] = cfg.momentum * vel.db[k] + g.db[k];
                    layer.biases[k] -= lr * vel.db[k];
                }
            }
        }

        EpochStats stats;
        stats.epoch = epoch;
        stats.lr = lr;
        stats.loss = epoch_loss / static_cast<double>(seen);
        stats.train_acc = clean_accuracy(result.net, train_ds);
        stats.test_acc = clean_accuracy(result.net, test_ds);
        result.history.push_back(stats);
    }
    return result;
}

// Clean/adversarial train/test accuracy, gaps and the empirical Lipschitz
// constant on the test set.
inline ExperimentReport evaluate(const Network& net, const Dataset& train_ds,
                                 const Dataset& test_ds, const AttackConfig& attack,
                                 AttackKind kind, const LipschitzConfig& lip) {
    ExperimentReport rep;
    rep.train_acc = clean_accuracy(net, train_ds);
    rep.test_acc = clean_accuracy(net, test_ds);
    rep.adv_train_acc = adv_accuracy(net, train_ds, attack, kind);
    rep.adv_test_acc = adv_accuracy(net, test_ds, attack, kind);
    rep.gap = rep.train_acc - rep.test_acc;
    rep.adv_gap = rep.adv_train_acc - rep.adv_test_acc;
    rep.test_lipschitz = empirical_lipschitz(net, test_ds, lip).mean;
    return rep;
}

}  // namespace seplab
