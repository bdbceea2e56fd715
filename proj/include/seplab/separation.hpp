// separation.hpp — exact nearest different-class distances (r-separation).
//
// cross_class_nn is the pruned production scan; brute_force_nn is the plain
// O(n*m*d) reference used as its oracle. Both return bit-identical records:
// exact minimum distance, nearest-neighbor index with lowest-index ties, and
// the same arithmetic per pair (integer 1/255 units on 8-bit Linf data,
// index-ordered accumulation for L2).

#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <utility>
#include <vector>

#include "seplab/core.hpp"
#include "seplab/dataset.hpp"

namespace seplab {

enum class SeparationMode { TrainTrain, TestTrain };

inline const char* mode_name(SeparationMode m) {
    return m == SeparationMode::TrainTrain ? "train-train" : "test-train";
}

struct SeparationRecord {
    std::size_t query_index = 0;
    int query_label = 0;
    std::size_t nn_index = 0;
    int nn_label = 0;
    double distance = 0.0;
    bool valid = false;  // false when no differently-labeled reference exists
};

struct SeparationReport {
    std::vector<SeparationRecord> records;
    double min = std::numeric_limits<double>::quiet_NaN();
    double mean = std::numeric_limits<double>::quiet_NaN();
    Metric metric = Metric::Linf;
    SeparationMode mode = SeparationMode::TrainTrain;

    std::size_t valid_count() const {
        std::size_t c = 0;
        for (const auto& r : records) c += r.valid ? 1 : 0;
        return c;
    }
};

namespace detail {

inline void finalize_aggregates(SeparationReport& report) {
    double lo = std::numeric_limits<double>::infinity();
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& r : report.records) {
        if (!r.valid) continue;
        lo = std::min(lo, r.distance);
        sum += r.distance;
        ++count;
    }
    if (count > 0) {
        report.min = lo;
        report.mean = sum / static_cast<double>(count);
    }
}

// L2 comparisons run on index-ordered squared sums; sqrt happens once per
// record so pruned and brute paths agree bitwise.
inline double l2_sq(std::span<const double> a, std::span<const double> b) {
    double sum = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double d = a[k] - b[k];
        sum += d * d;
    }
    return sum;
}

inline int linf_bytes(std::span<const std::uint8_t> a,
                      std::span<const std::uint8_t> b) {
    int best = 0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const int gap = std::abs(int(a[k]) - int(b[k]));
        if (gap > best) best = gap;
    }
    return best;
}

inline double linf_doubles(std::span<const double> a, std::span<const double> b) {
    double best = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k)
        best = std::max(best, std::abs(a[k] - b[k]));
    return best;
}

// Coordinates in decreasing reference variance: informative pixels first, so
// the Linf early exit triggers quickly on image data with constant borders.
inline std::vector<std::uint32_t> variance_order(const Dataset& refs) {
    const std::size_t d = refs.d;
    std::vector<double> mean(d, 0.0), sq(d, 0.0);
    for (std::size_t i = 0; i < refs.n; ++i) {
        const auto row = refs.row(i);
        for (std::size_t k = 0; k < d; ++k) {
            mean[k] += row[k];
            sq[k] += row[k] * row[k];
        }
    }
    std::vector<std::uint32_t> order(d);
    for (std::size_t k = 0; k < d; ++k) order[k] = static_cast<std::uint32_t>(k);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::uint32_t x, std::uint32_t y) {
                         const double vx = sq[x] - mean[x] * mean[x] / double(refs.n);
                         const double vy = sq[y] - mean[y] * mean[y] / double(refs.n);
                         return vx > vy;
                     });
    return order;
}

}  // namespace detail

// Exact per-query minimum distance to a differently-labeled reference.
// TrainTrain mode is queries == references with exclude_identical_index set.
// Pruning never changes results: per-query bound seeded from a strided
// reference sample, then a full scan with running-best early exit; ties go to
// the lowest reference index.
inline SeparationReport cross_class_nn(const Dataset& queries,
                                       const Dataset& references, Metric metric,
                                       bool exclude_identical_index) {
    if (queries.d != references.d)
        throw InputError("cross_class_nn: feature dimension mismatch");

    SeparationReport report;
    report.metric = metric;
    report.mode = exclude_identical_index ? SeparationMode::TrainTrain
                                          : SeparationMode::TestTrain;
    report.records.resize(queries.n);

    const std::size_t m = references.n;
    const std::size_t stride = std::max<std::size_t>(1, m / 64);
    const bool byte_path = metric == Metric::Linf && queries.has_bytes() &&
                           references.has_bytes();
    std::vector<std::uint32_t> order;
    if (metric == Metric::Linf) order = detail::variance_order(references);

#pragma omp parallel for schedule(dynamic, 8)
    for (std::ptrdiff_t qi = 0; qi < static_cast<std::ptrdiff_t>(queries.n); ++qi) {
        const std::size_t i = static_cast<std::size_t>(qi);
        SeparationRecord rec;
        rec.query_index = i;
        rec.query_label = queries.labels[i];

        auto admissible = [&](std::size_t j) {
            return references.labels[j] != rec.query_label &&
                   !(exclude_identical_index && j == i);
        };

        if (byte_path) {
            const auto q = queries.byte_row(i);
            int seed_bound = std::numeric_limits<int>::max();
            for (std::size_t j = 0; j < m; j += stride) {
                if (!admissible(j)) continue;
                const auto r = references.byte_row(j);
                int running = 0;
                for (std::uint32_t k : order) {
                    const int gap = std::abs(int(q[k]) - int(r[k]));
                    if (gap > running) {
                        running = gap;
                        if (running >= seed_bound) break;
                    }
                }
                seed_bound = std::min(seed_bound, running);
            }
            int best = std::numeric_limits<int>::max();
            std::size_t best_idx = 0;
            bool found = false;
            for (std::size_t j = 0; j < m; ++j) {
                if (!admissible(j)) continue;
                const auto r = references.byte_row(j);
                int running = 0;
                bool pruned = false;
                for (std::uint32_t k : order) {
                    const int gap = std::abs(int(q[k]) - int(r[k]));
                    if (gap > running) {
                        running = gap;
                        if (running > seed_bound || running >= best) {
                            pruned = true;
                            break;
                        }
                    }
                }
                if (!pruned && running < best) {
                    best = running;
                    best_idx = j;
                    found = true;
                }
            }
            if (found) {
                rec.valid = true;
                rec.nn_index = best_idx;
                rec.nn_label = references.labels[best_idx];
                rec.distance = static_cast<double>(best) / 255.0;
            }
        } else if (metric == Metric::Linf) {
            const auto q = queries.row(i);
            double seed_bound = std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < m; j += stride) {
                if (!admissible(j)) continue;
                const auto r = references.row(j);
                double running = 0.0;
                for (std::uint32_t k : order) {
                    const double gap = std::abs(q[k] - r[k]);
                    if (gap > running) {
                        running = gap;
                        if (running >= seed_bound) break;
                    }
                }
                seed_bound = std::min(seed_bound, running);
            }
            double best = std::numeric_limits<double>::infinity();
            std::size_t best_idx = 0;
            bool found = false;
            for (std::size_t j = 0; j < m; ++j) {
                if (!admissible(j)) continue;
                const auto r = references.row(j);
                double running = 0.0;
                bool pruned = false;
                for (std::uint32_t k : order) {
                    const double gap = std::abs(q[k] - r[k]);
                    if (gap > running) {
                        running = gap;
                        if (running > seed_bound || running >= best) {
                            pruned = true;
                            break;
                        }
                    }
                }
                if (!pruned && running < best) {
                    best = running;
                    best_idx = j;
                    found = true;
                }
            }
            if (found) {
                rec.valid = true;
                rec.nn_index = best_idx;
                rec.nn_label = references.labels[best_idx];
                rec.distance = best;
            }
        } else {
            const auto q = queries.row(i);
            double seed_sq = std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < m; j += stride)
                if (admissible(j))
                    seed_sq = std::min(seed_sq, detail::l2_sq(q, references.row(j)));
            double best_sq = std::numeric_limits<double>::infinity();
            std::size_t best_idx = 0;
            bool found = false;
            for (std::size_t j = 0; j < m; ++j) {
                if (!admissible(j)) continue;
                const auto r = references.row(j);
                double sum = 0.0;
                bool pruned = false;
                for (std::size_t k = 0; k < q.size(); ++k) {
                    const double g = q[k] - r[k];
                    sum += g * g;
                    if (sum > seed_sq || sum >= best_sq) {
                        pruned = true;
                        break;
                    }
                }
                if (!pruned && sum < best_sq) {
                    best_sq = sum;
                    best_idx = j;
                    found = true;
                }
            }
            if (found) {
                rec.valid = true;
                rec.nn_index = best_idx;
                rec.nn_label = references.labels[best_idx];
                rec.distance = std::sqrt(best_sq);
            }
        }
        report.records[i] = rec;
    }

    detail::finalize_aggregates(report);
    return report;
}

// Reference oracle: identical contract, no pruning, no seeding, no coordinate
// reordering. Deliberately self-contained.
inline SeparationReport brute_force_nn(const Dataset& queries,
                                       const Dataset& references, Metric metric,
                                       bool exclude_identical_index) {
    if (queries.d != references.d)
        throw InputError("brute_force_nn: feature dimension mismatch");

    SeparationReport report;
    report.metric = metric;
    report.mode = exclude_identical_index ? SeparationMode::TrainTrain
                                          : SeparationMode::TestTrain;
    report.records.resize(queries.n);
    const bool byte_path = metric == Metric::Linf && queries.has_bytes() &&
                           references.has_bytes();

    for (std::size_t i = 0; i < queries.n; ++i) {
        SeparationRecord rec;
        rec.query_index = i;
        rec.query_label = queries.labels[i];
        bool found = false;
        std::size_t best_idx = 0;
        int best_int = std::numeric_limits<int>::max();
        double best_real = std::numeric_limits<double>::infinity();

        for (std::size_t j = 0; j < references.n; ++j) {
            if (references.labels[j] == rec.query_label) continue;
            if (exclude_identical_index && j == i) continue;
            if (byte_path) {
                const int d = detail::linf_bytes(queries.byte_row(i),
                                                 references.byte_row(j));
                if (d < best_int) {
                    best_int = d;
                    best_idx = j;
                    found = true;
                }
            } else if (metric == Metric::Linf) {
                const double d =
                    detail::linf_doubles(queries.row(i), references.row(j));
                if (d < best_real) {
                    best_real = d;
                    best_idx = j;
                    found = true;
                }
            } else {
                const double d = detail::l2_sq(queries.row(i), references.row(j));
                if (d < best_real) {
                    best_real = d;
                    best_idx = j;
                    found = true;
                }
            }
        }
        if (found) {
            rec.valid = true;
            rec.nn_index = best_idx;
            rec.nn_label = references.labels[best_idx];
            if (byte_path)
                rec.distance = static_cast<double>(best_int) / 255.0;
            else if (metric == Metric::Linf)
                rec.distance = best_real;
            else
                rec.distance = std::sqrt(best_real);
        }
        report.records[i] = rec;
    }

    detail::finalize_aggregates(report);
    return report;
}

// Non-empty bins only, ascending. A value v lands in bin floor(v/bin_width).
inline std::vector<std::pair<double, std::size_t>> histogram(
    const SeparationReport& report, double bin_width) {
    if (!(bin_width > 0.0)) throw InputError("histogram: bin_width must be > 0");
    std::map<long long, std::size_t> bins;
    for (const auto& r : report.records) {
        if (!r.valid) continue;
        const auto k = static_cast<long long>(std::floor(r.distance / bin_width));
        ++bins[k];
    }
    std::vector<std::pair<double, std::size_t>> out;
    out.reserve(bins.size());
    for (const auto& [k, count] : bins)
        out.emplace_back(static_cast<double>(k) * bin_width, count);
    return out;
}

// Records at or below the threshold, closest first (ties by query index).
inline std::vector<SeparationRecord> flag_outliers(const SeparationReport& report,
                                                   double threshold) {
    if (threshold < 0.0) throw InputError("flag_outliers: threshold must be >= 0");
    std::vector<SeparationRecord> out;
    for (const auto& r : report.records)
        if (r.valid && r.distance <= threshold) out.push_back(r);
    std::stable_sort(out.begin(), out.end(),
                     [](const SeparationRecord& a, const SeparationRecord& b) {
                         if (a.distance != b.distance) return a.distance < b.distance;
                         return a.query_index < b.query_index;
                     });
    return out;
}

// Train-Train separation for the original labels and for an i.i.d. uniform
// relabeling of the same points.
inline std::pair<SeparationReport, SeparationReport> separation_with_random_labels(
    const Dataset& ds, Metric metric, std::uint64_t seed) {
    SeparationReport original = cross_class_nn(ds, ds, metric, true);
    const Dataset shuffled = random_relabel(ds, seed);
    SeparationReport randomized = cross_class_nn(shuffled, shuffled, metric, true);
    return {std::move(original), std::move(randomized)};
}

}  // namespace seplab
