#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "rfec/design.hpp"
#include "rfec/errors.hpp"
#include "rfec/forward.hpp"
#include "rfec/window.hpp"

using namespace rfec;

namespace {

DirectModel random_model(int k, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-0.1, 0.05);
    DirectModel m;
    m.y0 = u(rng);
    for (int c = 0; c < k; ++c) m.w.push_back(u(rng));
    return m;
}

PipeProfile random_profile(std::size_t n, double step, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(5.0, 40.0);
    std::vector<double> t(n);
    for (auto& v : t) v = u(rng);
    return PipeProfile(step, t);
}

}  // namespace

TEST_CASE("cell straddling two pieces takes the overlap-weighted mean") {
    const PipeProfile p(0.1, {10.0, 20.0, 30.0});
    // 30% of the cell over piece 0, 70% over piece 1.
    CHECK(cell_average(p, {0.07, 0.17}) == doctest::Approx(17.0).epsilon(1e-12));
}

TEST_CASE("aligned cell reads the single underlying piece") {
    const PipeProfile p(0.1, {10.0, 20.0, 30.0});
    const auto o = cell_overlaps(0.1, 3, {0.1, 0.2});
    REQUIRE(o.size() == 1);
    CHECK(o[0].piece == 1);
    CHECK(o[0].fraction == 1.0);
    CHECK(cell_average(p, {0.2, 0.3}) == 30.0);
}

TEST_CASE("cells past the pipe ends read the end pieces") {
    const PipeProfile p(0.1, {10.0, 20.0, 30.0});
    CHECK(cell_average(p, {-0.2, -0.1}) == 10.0);
    CHECK(cell_average(p, {0.35, 0.45}) == 30.0);
    CHECK(cell_average(p, {-0.05, 0.05}) == doctest::Approx(10.0));
    CHECK(cell_average(p, {0.25, 0.35}) == doctest::Approx(30.0));
    CHECK(cell_average(p, {0.15, 0.35}) == doctest::Approx(0.25 * 20.0 + 0.75 * 30.0));
    double total = 0.0;
    for (const auto& o : cell_overlaps(0.1, 3, {-0.3, 0.5})) total += o.fraction;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("sample positions cover the whole passage of the tool") {
    const PipeProfile p(0.1, std::vector<double>(30, 1.0));
    const ToolGeometry tool(5, 0.1, {1, 1}, {4, 5}, 0.02);
    const auto x = sample_positions(p, tool);
    REQUIRE(!x.empty());
    CHECK(tool.cell_centre(x.front(), 4) == doctest::Approx(p.centre(0)));
    CHECK(x.back() <= p.centre(29) + 1e-12);
    CHECK(x.back() + tool.sample_pitch() > p.centre(29));
    for (std::size_t i = 1; i < x.size(); ++i) CHECK(x[i] - x[i - 1] == doctest::Approx(0.02));

    CHECK_THROWS_WITH_AS(sample_positions(PipeProfile(0.1, std::vector<double>(4, 1.0)), tool),
                         "profile shorter than tool span", InvalidArgument);
}

TEST_CASE("build_T has an intercept column and flags windows off the profile") {
    const PipeProfile p(0.1, {1.0, 2.0, 3.0, 4.0, 5.0, 6.0});
    const ToolGeometry tool(3, 0.1, {1, 1}, {3, 3}, 0.1);
    const std::vector<double> x{0.05, 0.15, 0.25};
    const auto T = build_T(p, tool, x);
    REQUIRE(T.rows() == 3);
    REQUIRE(T.cols() == 4);
    CHECK((T.col(0).array() == 1.0).all());
    CHECK(T(0, 1) == 1.0);
    CHECK(T(0, 3) == 3.0);
    CHECK(T(2, 3) == 5.0);

    const std::vector<double> bad{0.05, 0.15, 0.7};
    CHECK_THROWS_WITH_AS(build_T(p, tool, bad), doctest::Contains("sample 2"), InvalidArgument);
}

TEST_CASE("spatial weights") {
    const std::vector<double> c{0.0, 4.0, 8.0};
    SUBCASE("midpoint") {
        const auto w = spatial_weights(2.0, c);
        CHECK(w.left_piece_index == 0);
        CHECK(w.a_bar() == 0.5);
        CHECK(w.b_bar() == 0.5);
    }
    SUBCASE("on a centre") {
        const auto w = spatial_weights(4.0, c);
        CHECK(w.left_piece_index == 1);
        CHECK(w.a_bar() == 1.0);
        CHECK(w.b_bar() == 0.0);
    }
    SUBCASE("a = 1, b = 3") {
        const auto w = spatial_weights(1.0, c);
        CHECK(w.a == 1.0);
        CHECK(w.b == 3.0);
        CHECK(w.a_bar() == 0.75);
        CHECK(w.b_bar() == 0.25);
    }
    SUBCASE("clamped before the first centre") {
        const auto w = spatial_weights(-3.0, c);
        CHECK(w.left_piece_index == 0);
        CHECK(w.a_bar() == 1.0);
    }
    SUBCASE("clamped after the last centre") {
        const auto w = spatial_weights(11.0, c);
        CHECK(w.left_piece_index == 1);
        CHECK(w.b_bar() == 1.0);
    }
    SUBCASE("weights are a partition of unity") {
        std::mt19937_64 rng(1);
        std::uniform_real_distribution<double> u(-2.0, 10.0);
        for (int i = 0; i < 200; ++i) {
            const auto w = spatial_weights(u(rng), c);
            CHECK(w.a_bar() + w.b_bar() == doctest::Approx(1.0).epsilon(1e-15));
            CHECK(w.a_bar() >= 0.0);
            CHECK(w.b_bar() >= 0.0);
            CHECK(w.a_bar() <= 1.0);
        }
    }
    CHECK_THROWS_AS(spatial_weights(0.0, std::vector<double>{}), InvalidArgument);
}

TEST_CASE("aligned W rows hold the weights verbatim") {
    const PipeProfile p(0.1, std::vector<double>(20, 1.0));
    const ToolGeometry tool(4, 0.1, {1, 1}, {3, 4}, 0.1);
    const DirectModel model{0.0, {-1.0, -2.0, -3.0, -4.0}};
    const std::vector<double> x{0.35};
    const auto sys = build_W(model, tool, p.centres(), p.step_length(), x);
    const auto dense = sys.dense();
    for (std::size_t j = 0; j < 20; ++j) {
        const double expected = (j >= 3 && j <= 6) ? model.w[j - 3] : 0.0;
        CHECK(dense[j] == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("half-offset W row splits every weight evenly") {
    const PipeProfile p(0.1, std::vector<double>(20, 1.0));
    const ToolGeometry tool(2, 0.1, {1, 1}, {2, 2}, 0.1);
    const DirectModel model{0.0, {-1.0, -3.0}};
    const std::vector<double> x{0.4};
    const auto sys = build_W(model, tool, p.centres(), p.step_length(), x);
    const auto& row = sys.rows()[0];
    CHECK(row.start == 3);
    REQUIRE(row.values.size() == 3);
    CHECK(row.values[0] == doctest::Approx(-0.5));
    CHECK(row.values[1] == doctest::Approx(-2.0));
    CHECK(row.values[2] == doctest::Approx(-1.5));
}

TEST_CASE("W rows conserve the weight sum and keep a monotone band") {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> k_dist(2, 30);
    std::uniform_real_distribution<double> ratio(0.3, 1.0);
    std::uniform_real_distribution<double> pitch_dist(0.003, 0.05);
    for (int trial = 0; trial < 100; ++trial) {
        const int k = k_dist(rng);
        const double step = 0.1;
        const double cell = step * ratio(rng);
        const std::size_t n = static_cast<std::size_t>(std::ceil(k * cell / step)) + 20;
        const ToolGeometry tool(k, cell, {1, 1}, {k, k}, pitch_dist(rng));
        const auto model = random_model(k, rng);
        const PipeProfile p(step, std::vector<double>(n, 1.0));
        const auto x = sample_positions(p, tool);
        const auto sys = build_W(model, tool, p.centres(), step, x);
        const double wsum = std::accumulate(model.w.begin(), model.w.end(), 0.0);
        std::size_t prev_start = 0;
        for (const auto& row : sys.rows()) {
            double s = 0.0;
            for (double v : row.values) s += v;
            CHECK(s == doctest::Approx(wsum).epsilon(1e-12));
            CHECK(row.values.size() <= static_cast<std::size_t>(k) + 1);
            CHECK(row.start >= prev_start);
            CHECK(row.start + row.values.size() <= n);
            prev_start = row.start;
        }
    }
}

TEST_CASE("W and T agree on aligned cells and stay within the interpolation bound otherwise") {
    std::mt19937_64 rng(77);
    const auto p = random_profile(60, 0.1, rng);
    const auto model = random_model(8, rng);
    double wabs = 0.0;
    for (double w : model.w) wabs += std::abs(w);
    double max_jump = 0.0;
    for (std::size_t i = 1; i < p.size(); ++i) {
        max_jump = std::max(max_jump, std::abs(p.thickness()[i] - p.thickness()[i - 1]));
    }
    for (double sample_pitch : {0.1, 0.013}) {
        const ToolGeometry tool(8, 0.1, {1, 2}, {7, 8}, sample_pitch);
        const auto x = sample_positions(p, tool);
        const auto T = build_T(p, tool, x);
        const auto sys = build_W(model, tool, p.centres(), 0.1, x);
        const auto wt = sys.apply(p.thickness());
        Eigen::VectorXd theta(9);
        theta(0) = model.y0;
        for (int j = 0; j < 8; ++j) theta(j + 1) = model.w[static_cast<std::size_t>(j)];
        const Eigen::VectorXd ty = T * theta;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double diff = std::abs(wt[i] + model.y0 - ty(static_cast<Eigen::Index>(i)));
            if (sample_pitch == 0.1) {
                CHECK(diff < 1e-12);
            } else {
                CHECK(diff <= max_jump * wabs + 1e-12);
            }
        }
    }
}

TEST_CASE("build_W rejects a model of the wrong size") {
    const PipeProfile p(0.1, std::vector<double>(20, 1.0));
    const ToolGeometry tool(4, 0.1, {1, 1}, {3, 4}, 0.1);
    const std::vector<double> x{0.35};
    CHECK_THROWS_AS(build_W(DirectModel{0.0, {1.0}}, tool, p.centres(), 0.1, x), InvalidArgument);
}

TEST_CASE("dataset masking") {
    std::vector<bool> joints(40, false);
    joints[20] = true;
    const PipeProfile p(0.1, std::vector<double>(40, 10.0), joints);
    const ToolGeometry tool(10, 0.1, {1, 2}, {8, 10}, 0.01);
    const auto x = sample_positions(p, tool);
    std::vector<double> y(x.size(), 0.0);
    const MeasurementSeries series(x, y);
    const auto T = build_T(p, tool, x);

    const auto a = mask_dataset(T, series, p, tool, DatasetMode::All);
    const auto b = mask_dataset(T, series, p, tool, DatasetMode::NoReceiverJoints);
    const auto c = mask_dataset(T, series, p, tool, DatasetMode::NoJoints);
    CHECK(a.kept.size() == x.size());
    CHECK(b.kept.size() < a.kept.size());
    CHECK(c.kept.size() < b.kept.size());
    CHECK(std::includes(a.kept.begin(), a.kept.end(), b.kept.begin(), b.kept.end()));
    CHECK(std::includes(b.kept.begin(), b.kept.end(), c.kept.begin(), c.kept.end()));

    SUBCASE("dropped rows match a brute-force overlap scan") {
        auto touches = [&](std::size_t i, const CellRange& cells) {
            for (int cidx = cells.first; cidx <= cells.last; ++cidx) {
                const auto e = cell_extent(tool, x[i], cidx - 1);
                if (std::min(e.hi, 2.1) - std::max(e.lo, 2.0) > 1e-9) return true;
            }
            return false;
        };
        std::vector<std::size_t> expect_c;
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (!touches(i, tool.receiver_cells()) && !touches(i, tool.exciter_cells())) expect_c.push_back(i);
        }
        CHECK(c.kept == expect_c);
    }

    SUBCASE("a single joint removes two contiguous runs in mode c") {
        std::size_t runs = 0;
        bool in_gap = false;
        for (std::size_t i = 0, r = 0; i < x.size(); ++i) {
            const bool kept = r < c.kept.size() && c.kept[r] == i;
            if (kept) {
                ++r;
                in_gap = false;
            } else if (!in_gap) {
                ++runs;
                in_gap = true;
            }
        }
        CHECK(runs == 2);
    }

    SUBCASE("rows stay paired with their measurements") {
        for (Eigen::Index r = 0; r < c.T.rows(); ++r) {
            CHECK(c.T.row(r) == T.row(static_cast<Eigen::Index>(c.kept[static_cast<std::size_t>(r)])));
        }
    }
}

TEST_CASE("dataset mode parsing") {
    CHECK(parse_dataset_mode("a") == DatasetMode::All);
    CHECK(parse_dataset_mode("b") == DatasetMode::NoReceiverJoints);
    CHECK(parse_dataset_mode("c") == DatasetMode::NoJoints);
    CHECK(to_char(DatasetMode::NoJoints) == 'c');
    CHECK_THROWS_AS(parse_dataset_mode("d"), InvalidArgument);
}

TEST_CASE("Chauvenet criterion") {
    SUBCASE("one gross outlier among ten") {
        // m * erfc(z / sqrt 2) is 0.0443 for the 10 and 7.52 for the zeros.
        std::vector<double> r(9, 0.0);
        r.push_back(10.0);
        const auto keep = chauvenet_filter(r);
        for (std::size_t i = 0; i < 9; ++i) CHECK(keep[i]);
        CHECK_FALSE(keep[9]);
    }
    SUBCASE("no spread keeps everything") {
        const auto keep = chauvenet_filter(std::vector<double>(5, 2.0));
        CHECK(std::all_of(keep.begin(), keep.end(), [](bool k) { return k; }));
    }
    SUBCASE("three samples can never be rejected") {
        // The largest attainable |z| for m = 3 is 2/sqrt(3) < 1.383, the
        // rejection threshold at m = 3.
        std::mt19937_64 rng(8);
        std::normal_distribution<double> n(0.0, 1.0);
        for (int i = 0; i < 100; ++i) {
            const std::vector<double> r{n(rng), n(rng), 50.0 * n(rng)};
            const auto keep = chauvenet_filter(r);
            CHECK(std::all_of(keep.begin(), keep.end(), [](bool k) { return k; }));
        }
    }
    CHECK_THROWS_AS(chauvenet_filter(std::vector<double>{1.0, 2.0}), InvalidArgument);
}
