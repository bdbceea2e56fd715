// attacks.hpp — Linf PGD and multi-targeted attacks on networks.
//
// PGD ascends the cross-entropy with signed gradient steps of epsilon/5
// (10 steps by default), projecting every iterate into the epsilon-ball and
// the unit box, and returns the best-loss iterate. The multi-targeted attack
// runs margin ascent (logit_t - logit_y) separately toward every wrong class,
// 20 iterations per target with step 2*epsilon/steps and a random start.
// Ties on the argmax count as misclassification throughout.

#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "seplab/core.hpp"
#include "seplab/dataset.hpp"
#include "seplab/network.hpp"

namespace seplab {

struct AttackConfig {
    double epsilon = 0.0;
    int steps = 10;
    double step_size = 0.0;  // <= 0 resolves to epsilon / 5
    bool random_start = false;
    int restarts = 1;
    std::uint64_t seed = 0;

    double resolved_step() const {
        return step_size > 0.0 ? step_size : epsilon / 5.0;
    }
};

struct AttackOutcome {
    Vector adversarial_point;
    bool success = false;
    double loss_achieved = 0.0;
};

enum class AttackKind { PGD, MT };

inline const char* attack_name(AttackKind k) {
    return k == AttackKind::PGD ? "pgd" : "mt";
}

inline AttackKind attack_from_name(const std::string& s) {
    if (s == "pgd") return AttackKind::PGD;
    if (s == "mt") return AttackKind::MT;
    throw InputError("unknown attack '" + s + "' (expected pgd or mt)");
}

inline Vector softmax(const Vector& logits) {
    double m = logits[0];
    for (double v : logits) m = std::max(m, v);
    Vector p(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(logits[i] - m);
        sum += p[i];
    }
    for (double& v : p) v /= sum;
    return p;
}

// Mean-free softmax cross-entropy for a 1-based label.
inline double cross_entropy(const Vector& logits, int label) {
    double m = logits[0];
    for (double v : logits) m = std::max(m, v);
    double lse = 0.0;
    for (double v : logits) lse += std::exp(v - m);
    return std::log(lse) + m - logits[static_cast<std::size_t>(label - 1)];
}

// d(cross_entropy)/d(logits) = softmax(logits) - onehot(label).
inline Vector cross_entropy_grad(const Vector& logits, int label) {
    Vector g = softmax(logits);
    g[static_cast<std::size_t>(label - 1)] -= 1.0;
    return g;
}

// Strict argmax: returns the 1-based winner, or 0 when the maximum is tied.
inline int strict_argmax(const Vector& logits) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < logits.size(); ++i)
        if (logits[i] > logits[best]) best = i;
    for (std::size_t i = 0; i < logits.size(); ++i)
        if (i != best && logits[i] == logits[best]) return 0;
    return static_cast<int>(best) + 1;
}

inline bool clean_correct(const Network& net, const Vector& x, int label) {
    return strict_argmax(logits_eval(net, x)) == label;
}

namespace detail {

inline void check_feasible(const Vector& adv, const Vector& origin, double eps) {
    for (std::size_t k = 0; k < adv.size(); ++k) {
        if (std::abs(adv[k] - origin[k]) > eps + 1e-12 || adv[k] < 0.0 || adv[k] > 1.0)
            throw NumericError("attack produced an infeasible point");
    }
}

inline Vector random_ball_point(const Vector& x, double eps, RandomStream& rng) {
    Vector out(x.size());
    for (std::size_t k = 0; k < x.size(); ++k)
        out[k] = std::clamp(x[k] + rng.uniform(-eps, eps), 0.0, 1.0);
    return out;
}

}  // namespace detail

inline AttackOutcome pgd(const Network& net, const Vector& x, int label,
                         const AttackConfig& cfg) {
    if (cfg.epsilon < 0.0) throw InputError("pgd: epsilon must be >= 0");
    if (cfg.steps < 1) throw InputError("pgd: steps must be >= 1");
    const double step = cfg.resolved_step();

    AttackOutcome best;
    best.adversarial_point = x;
    best.loss_achieved = -std::numeric_limits<double>::infinity();

    RandomStream base(cfg.seed);
    for (int restart = 0; restart < std::max(1, cfg.restarts); ++restart) {
        RandomStream rng = base.derive(static_cast<std::uint64_t>(restart));
        Vector adv = cfg.random_start
                         ? detail::random_ball_point(x, cfg.epsilon, rng)
                         : x;
        double loss = cross_entropy(logits_eval(net, adv), label);
        if (loss > best.loss_achieved) {
            best.loss_achieved = loss;
            best.adversarial_point = adv;
        }
        for (int s = 0; s < cfg.steps; ++s) {
            ForwardTrace trace;
            const Vector logits = forward(net, adv, Mode::Eval, nullptr, &trace);
            const Vector upstream = cross_entropy_grad(logits, label);
            const Vector grad = backward_input_only(net, trace, upstream);
            for (std::size_t k = 0; k < adv.size(); ++k) {
                if (grad[k] > 0.0)
                    adv[k] += step;
                else if (grad[k] < 0.0)
                    adv[k] -= step;
            }
            adv = clip_domain(project_ball(adv, x, cfg.epsilon, Metric::Linf), 0.0, 1.0);
            loss = cross_entropy(logits_eval(net, adv), label);
            if (loss > best.loss_achieved) {
                best.loss_achieved = loss;
                best.adversarial_point = adv;
            }
        }
    }

    detail::check_feasible(best.adversarial_point, x, cfg.epsilon);
    best.success = strict_argmax(logits_eval(net, best.adversarial_point)) != label;
    return best;
}

// Margin ascent toward each wrong class in turn; returns at the first iterate
// that flips the prediction, otherwise the best-margin point over all targets.
inline AttackOutcome multi_targeted(const Network& net, const Vector& x, int label,
                                    const AttackConfig& cfg) {
    if (net.class_count < 2) throw InputError("multi_targeted: need >= 2 classes");
    if (cfg.epsilon < 0.0) throw InputError("multi_targeted: epsilon must be >= 0");
    if (cfg.steps < 1) throw InputError("multi_targeted: steps must be >= 1");
    const double step = 2.0 * cfg.epsilon / static_cast<double>(cfg.steps);

    AttackOutcome best;
    best.adversarial_point = x;
    best.loss_achieved = -std::numeric_limits<double>::infinity();

    RandomStream base(cfg.seed);
    for (int target = 1; target <= net.class_count; ++target) {
        if (target == label) continue;
        RandomStream rng = base.derive(static_cast<std::uint64_t>(target));
        Vector adv = detail::random_ball_point(x, cfg.epsilon, rng);

        for (int s = 0; s <= cfg.steps; ++s) {
            ForwardTrace trace;
            const Vector logits = forward(net, adv, Mode::Eval, nullptr, &trace);
            const double margin =
                logits[std::size_t(target - 1)] - logits[std::size_t(label - 1)];
            if (margin > best.loss_achieved) {
                best.loss_achieved = margin;
                best.adversarial_point = adv;
            }
            if (strict_argmax(logits) != label) {
                detail::check_feasible(adv, x, cfg.epsilon);
                return {adv, true, margin};
            }
            if (s == cfg.steps) break;
            Vector upstream(logits.size(), 0.0);
            upstream[std::size_t(target - 1)] = 1.0;
            upstream[std::size_t(label - 1)] = -1.0;
            const Vector grad = backward_input_only(net, trace, upstream);
            for (std::size_t k = 0; k < adv.size(); ++k) {
                if (grad[k] > 0.0)
                    adv[k] += step;
                else if (grad[k] < 0.0)
                    adv[k] -= step;
            }
            adv = clip_domain(project_ball(adv, x, cfg.epsilon, Metric::Linf), 0.0, 1.0);
        }
    }

    detail::check_feasible(best.adversarial_point, x, cfg.epsilon);
    best.success =
        strict_argmax(logits_eval(net, best.adversarial_point)) != label;
    return best;
}

inline AttackOutcome run_attack(const Network& net, const Vector& x, int label,
                                const AttackConfig& cfg, AttackKind kind) {
    return kind == AttackKind::PGD ? pgd(net, x, label, cfg)
                                   : multi_targeted(net, x, label, cfg);
}

// Fraction of examples that are cleanly correct AND survive the attack.
// Per-example randomness derives from (cfg.seed, example index).
inline double adv_accuracy(const Network& net, const Dataset& ds,
                           const AttackConfig& cfg, AttackKind kind) {
    std::vector<char> robust(ds.n, 0);
    RandomStream base(cfg.seed);

#pragma omp parallel for schedule(dynamic, 4)
    for (std::ptrdiff_t qi = 0; qi < static_cast<std::ptrdiff_t>(ds.n); ++qi) {
        const auto i = static_cast<std::size_t>(qi);
        const Vector x = ds.row_vec(i);
        if (!clean_correct(net, x, ds.labels[i])) continue;
        AttackConfig local = cfg;
        local.seed = base.derive(i).seed();
        const AttackOutcome out = run_attack(net, x, ds.labels[i], local, kind);
        robust[i] = out.success ? 0 : 1;
    }

    std::size_t count = 0;
    for (char r : robust) count += static_cast<std::size_t>(r);
    return static_cast<double>(count) / static_cast<double>(ds.n);
}

inline double clean_accuracy(const Network& net, const Dataset& ds) {
    std::size_t count = 0;
    for (std::size_t i = 0; i < ds.n; ++i)
        if (clean_correct(net, ds.row_vec(i), ds.labels[i])) ++count;
    return static_cast<double>(count) / static_cast<double>(ds.n);
}

}  // namespace seplab
