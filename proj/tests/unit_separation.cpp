#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "seplab/separation.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace seplab;
using namespace testutil;

namespace {

bool records_identical(const SeparationReport& a, const SeparationReport& b) {
    if (a.records.size() != b.records.size()) return false;
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        const auto& ra = a.records[i];
        const auto& rb = b.records[i];
        if (ra.valid != rb.valid) return false;
        if (!ra.valid) continue;
        if (ra.nn_index != rb.nn_index || ra.nn_label != rb.nn_label ||
            ra.distance != rb.distance)
            return false;
    }
    return true;
}

}  // namespace

TEST_CASE("two point example") {
    const Dataset ds = one_d_dataset({0.0, 0.5}, {1, 2}, 2);
    const auto report = cross_class_nn(ds, ds, Metric::Linf, true);
    REQUIRE(report.records.size() == 2);
    CHECK(report.records[0].distance == 0.5);
    CHECK(report.records[1].distance == 0.5);
    CHECK(report.records[0].nn_index == 1);
    CHECK(report.records[1].nn_index == 0);
    CHECK(report.min == 0.5);
    CHECK(report.mean == 0.5);
    CHECK(report.mode == SeparationMode::TrainTrain);
}

TEST_CASE("pruned scan is record-identical to the brute oracle") {
    RandomStream rng(1);
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t n = 2 + rng.uniform_int(60);
        const std::size_t d = 1 + rng.uniform_int(12);
        const int classes = 2 + int(rng.uniform_int(3));
        const Metric metric = trial % 3 == 2 ? Metric::L2 : Metric::Linf;
        const bool bytes = trial % 2 == 0;
        const Dataset refs = bytes
                                 ? random_byte_dataset(n, d, classes, 100 + trial)
                                 : random_dataset(n, d, classes, 100 + trial);
        SUBCASE("") {}  // keep doctest happy about loop structure
        // Train-Train on itself
        const auto fast_tt = cross_class_nn(refs, refs, metric, true);
        const auto slow_tt = brute_force_nn(refs, refs, metric, true);
        CHECK(records_identical(fast_tt, slow_tt));
        // Test-Train against an independent query set
        const Dataset queries = bytes
                                    ? random_byte_dataset(n / 2 + 1, d, classes,
                                                          500 + trial)
                                    : random_dataset(n / 2 + 1, d, classes,
                                                     500 + trial);
        const auto fast_qt = cross_class_nn(queries, refs, metric, false);
        const auto slow_qt = brute_force_nn(queries, refs, metric, false);
        CHECK(records_identical(fast_qt, slow_qt));
    }
}

TEST_CASE("duplicate points with different labels have distance zero") {
    const Dataset ds = one_d_dataset({0.3, 0.3, 0.9}, {1, 2, 1}, 2);
    const auto report = brute_force_nn(ds, ds, Metric::Linf, true);
    CHECK(report.min == 0.0);
    CHECK(report.records[0].distance == 0.0);
    CHECK(report.records[0].nn_index == 1);
    const auto fast = cross_class_nn(ds, ds, Metric::Linf, true);
    CHECK(records_identical(fast, report));
}

TEST_CASE("singleton reference of the other class") {
    const Dataset queries = one_d_dataset({0.1}, {1}, 2);
    const Dataset refs = one_d_dataset({0.7}, {2}, 2);
    const auto report = cross_class_nn(queries, refs, Metric::Linf, false);
    CHECK(report.records[0].valid);
    CHECK(report.records[0].distance == doctest::Approx(0.6));
}

TEST_CASE("queries with no other class get an error marker") {
    const Dataset ds = one_d_dataset({0.1, 0.9}, {1, 1}, 1);
    const auto report = cross_class_nn(ds, ds, Metric::Linf, true);
    CHECK(report.valid_count() == 0);
    CHECK_FALSE(report.records[0].valid);
    CHECK(std::isnan(report.min));
}

TEST_CASE("8-bit path distances are exact 1/255 multiples") {
    const Dataset ds = random_byte_dataset(30, 6, 3, 9);
    const auto report = cross_class_nn(ds, ds, Metric::Linf, true);
    for (const auto& rec : report.records) {
        REQUIRE(rec.valid);
        const double units = rec.distance * 255.0;
        CHECK(units == doctest::Approx(std::round(units)).epsilon(1e-12));
        CHECK(rec.distance == std::round(units) / 255.0);
    }
}

TEST_CASE("symmetric pair property in train-train mode") {
    for (int trial = 0; trial < 10; ++trial) {
        const Dataset ds = random_dataset(40, 4, 3, 700 + trial);
        const auto report = cross_class_nn(ds, ds, Metric::Linf, true);
        std::size_t argmin = 0;
        for (std::size_t i = 0; i < report.records.size(); ++i)
            if (report.records[i].valid &&
                report.records[i].distance == report.min)
                argmin = i;
        const auto& winner = report.records[argmin];
        const auto& partner = report.records[winner.nn_index];
        CHECK(partner.distance == winner.distance);
    }
}

TEST_CASE("adding reference points never increases any distance") {
    const Dataset small = random_dataset(20, 3, 2, 51);
    Dataset large = small;
    const Dataset extra = random_dataset(15, 3, 2, 52);
    large.n += extra.n;
    large.features.insert(large.features.end(), extra.features.begin(),
                          extra.features.end());
    large.labels.insert(large.labels.end(), extra.labels.begin(), extra.labels.end());

    const Dataset queries = random_dataset(10, 3, 2, 53);
    const auto before = cross_class_nn(queries, small, Metric::Linf, false);
    const auto after = cross_class_nn(queries, large, Metric::Linf, false);
    for (std::size_t i = 0; i < queries.n; ++i)
        CHECK(after.records[i].distance <= before.records[i].distance);
}

TEST_CASE("histogram") {
    SUBCASE("single record lands in the floor bin") {
        SeparationReport report;
        report.records.push_back({0, 1, 1, 2, 0.5, true});
        const auto bins = histogram(report, 0.2);
        REQUIRE(bins.size() == 1);
        CHECK(bins[0].first == doctest::Approx(0.4));
        CHECK(bins[0].second == 1);
    }
    SUBCASE("empty report gives an empty histogram") {
        SeparationReport report;
        CHECK(histogram(report, 0.1).empty());
    }
    SUBCASE("counts are conserved") {
        const Dataset ds = random_dataset(100, 5, 3, 31);
        const auto report = cross_class_nn(ds, ds, Metric::Linf, true);
        const auto bins = histogram(report, 0.05);
        std::size_t total = 0;
        for (const auto& [start, count] : bins) total += count;
        CHECK(total == report.valid_count());
    }
    CHECK_THROWS_AS(histogram(SeparationReport{}, 0.0), InputError);
}

TEST_CASE("flag_outliers") {
    Dataset ds = gen_blobs({{0.2, 0.2}, {0.8, 0.8}}, 0.05, 20, 6);
    // Plant an exact duplicate pair with conflicting labels.
    ds.features.push_back(0.5);
    ds.features.push_back(0.5);
    ds.features.push_back(0.5);
    ds.features.push_back(0.5);
    ds.labels.push_back(1);
    ds.labels.push_back(2);
    ds.n += 2;

    const auto report = cross_class_nn(ds, ds, Metric::Linf, true);
    SUBCASE("threshold zero finds exactly the duplicates") {
        const auto flagged = flag_outliers(report, 0.0);
        REQUIRE(flagged.size() == 2);
        CHECK(flagged[0].query_index == 40);
        CHECK(flagged[1].query_index == 41);
        CHECK(flagged[0].distance == 0.0);
    }
    SUBCASE("threshold at the max returns everything") {
        double max_dist = 0.0;
        for (const auto& r : report.records)
            max_dist = std::max(max_dist, r.distance);
        CHECK(flag_outliers(report, max_dist).size() == report.valid_count());
    }
    SUBCASE("flagged records sort ascending") {
        const auto flagged = flag_outliers(report, 1.0);
        for (std::size_t i = 1; i < flagged.size(); ++i)
            CHECK(flagged[i - 1].distance <= flagged[i].distance);
    }
}

TEST_CASE("random label baseline") {
    SUBCASE("randomized min never exceeds the original on multi-point classes") {
        for (int trial = 0; trial < 8; ++trial) {
            const Dataset ds = gen_blobs({{0.1, 0.1}, {0.9, 0.9}, {0.1, 0.9}}, 0.05,
                                         12, 40 + trial);
            auto [original, randomized] =
                separation_with_random_labels(ds, Metric::Linf, 17 + trial);
            REQUIRE(original.valid_count() > 0);
            REQUIRE(randomized.valid_count() > 0);
            CHECK(randomized.min <= original.min + 1e-12);
        }
    }
    SUBCASE("single class marks both reports invalid") {
        const Dataset ds = one_d_dataset({0.1, 0.2}, {1, 1}, 1);
        auto [original, randomized] =
            separation_with_random_labels(ds, Metric::Linf, 3);
        CHECK(original.valid_count() == 0);
        CHECK(randomized.valid_count() == 0);
    }
    SUBCASE("deterministic per seed") {
        const Dataset ds = random_dataset(30, 3, 3, 8);
        auto [o1, r1] = separation_with_random_labels(ds, Metric::Linf, 5);
        auto [o2, r2] = separation_with_random_labels(ds, Metric::Linf, 5);
        CHECK(records_identical(r1, r2));
    }
}

#ifdef _OPENMP
TEST_CASE("reports are identical for any worker count") {
    const Dataset ds = random_byte_dataset(120, 8, 3, 61);
    const int saved = omp_get_max_threads();
    omp_set_num_threads(1);
    const auto serial = cross_class_nn(ds, ds, Metric::Linf, true);
    omp_set_num_threads(saved);
    const auto parallel = cross_class_nn(ds, ds, Metric::Linf, true);
    CHECK(records_identical(serial, parallel));
    CHECK(serial.min == parallel.min);
    CHECK(serial.mean == parallel.mean);
}
#endif

TEST_CASE("spot exactness: no closer different-class reference exists") {
    const Dataset ds = random_dataset(60, 4, 3, 99);
    const auto report = cross_class_nn(ds, ds, Metric::Linf, true);
    RandomStream rng(4);
    for (int probe = 0; probe < 200; ++probe) {
        const std::size_t i = rng.uniform_int(ds.n);
        const std::size_t j = rng.uniform_int(ds.n);
        if (i == j || ds.labels[i] == ds.labels[j]) continue;
        CHECK(dist(Metric::Linf, ds.row_vec(i), ds.row_vec(j)) >=
              report.records[i].distance);
    }
}
