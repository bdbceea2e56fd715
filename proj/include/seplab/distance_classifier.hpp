// distance_classifier.hpp — distance-based astute classifier.
//
// score(x)_i = dist(x, class i points) / r, prediction is the argmin, and the
// binary variant is (dist(x, negatives) - dist(x, positives)) / 2r. The
// certificate uses unscaled distances: half the margin between the winning
// class distance and the runner-up is a radius inside which the prediction
// cannot change (triangle inequality), independently of r.

#pragma once

#include <limits>
#include <vector>

#include "seplab/core.hpp"
#include "seplab/dataset.hpp"

namespace seplab {

struct Certificate {
    int predicted = 0;
    double margin = 0.0;           // min_{j != predicted} d_j - d_predicted
    double certified_radius = 0.0;  // max(0, margin / 2)
};

class DistanceClassifier {
public:
    DistanceClassifier(std::vector<std::vector<Vector>> class_points, double r,
                       Metric metric)
        : class_points_(std::move(class_points)), r_(r), metric_(metric) {
        if (class_points_.empty())
            throw InputError("DistanceClassifier: need at least one class");
        for (std::size_t c = 0; c < class_points_.size(); ++c)
            if (class_points_[c].empty())
                throw InputError("DistanceClassifier: class " + std::to_string(c + 1) +
                                 " has no points");
        if (!(r_ > 0.0)) throw InputError("DistanceClassifier: r must be > 0");
    }

    static DistanceClassifier from_dataset(const Dataset& ds, double r,
                                           Metric metric) {
        std::vector<std::vector<Vector>> points(ds.class_count);
        for (std::size_t i = 0; i < ds.n; ++i)
            points[ds.labels[i] - 1].push_back(ds.row_vec(i));
        return DistanceClassifier(std::move(points), r, metric);
    }

    int class_count() const { return static_cast<int>(class_points_.size()); }
    double r() const { return r_; }
    Metric metric() const { return metric_; }

    // Unscaled minimum distances to each class support.
    std::vector<double> class_distances(const Vector& x) const {
        std::vector<double> out(class_points_.size());
        for (std::size_t c = 0; c < class_points_.size(); ++c) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& p : class_points_[c])
                best = std::min(best, dist(metric_, x, p));
            out[c] = best;
        }
        return out;
    }

    std::vector<double> score(const Vector& x) const {
        auto d = class_distances(x);
        for (double& v : d) v /= r_;
        return d;
    }

    int predict(const Vector& x) const {
        const auto d = class_distances(x);
        std::size_t best = 0;
        for (std::size_t c = 1; c < d.size(); ++c)
            if (d[c] < d[best]) best = c;
        return static_cast<int>(best) + 1;
    }

    // Binary case: class 1 = positive support, class 2 = negative support.
    // sign(binary_score) matches predict, with 0 mapping to class 1.
    double binary_score(const Vector& x) const {
        if (class_points_.size() != 2)
            throw InputError("binary_score: classifier must have exactly 2 classes");
        const auto d = class_distances(x);
        return (d[1] - d[0]) / (2.0 * r_);
    }

    Certificate certify(const Vector& x) const {
        const auto d = class_distances(x);
        std::size_t best = 0;
        for (std::size_t c = 1; c < d.size(); ++c)
            if (d[c] < d[best]) best = c;
        double runner_up = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < d.size(); ++c)
            if (c != best) runner_up = std::min(runner_up, d[c]);

        Certificate cert;
        cert.predicted = static_cast<int>(best) + 1;
        cert.margin = d.size() > 1 ? runner_up - d[best] : 0.0;
        cert.certified_radius = std::max(0.0, cert.margin / 2.0);
        return cert;
    }

    // Fraction of points that are correctly predicted AND certified at the
    // given radius: a sound lower bound on astuteness.
    double astuteness(const Dataset& test, double radius) const {
        if (radius < 0.0) throw InputError("astuteness: radius must be >= 0");
        std::size_t hits = 0;
        for (std::size_t i = 0; i < test.n; ++i) {
            const Certificate cert = certify(test.row_vec(i));
            if (cert.predicted == test.labels[i] && cert.certified_radius >= radius)
                ++hits;
        }
        return static_cast<double>(hits) / static_cast<double>(test.n);
    }

private:
    std::vector<std::vector<Vector>> class_points_;
    double r_;
    Metric metric_;
};

}  // namespace seplab
