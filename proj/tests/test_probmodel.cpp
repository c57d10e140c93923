#include "medbounds/csv_ingest.hpp"
#include "medbounds/errors.hpp"
#include "medbounds/mediation_law.hpp"
#include "medbounds/world.hpp"
#include "oracles.hpp"
#include "random_laws.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

using namespace medbounds;
using namespace medtest;

namespace {

DatasetCodecs binary_codecs(std::size_t r_components = 0) {
    DatasetCodecs k;
    k.exposure = make_exposure_codec("A", "0", "1");
    std::vector<CategoricalCodec> rs;
    for (std::size_t j = 0; j < r_components; ++j) rs.push_back(CategoricalCodec::numbered("R" + std::to_string(j), 2));
    k.confounders = ProductCodec(rs);
    k.mediator = CategoricalCodec::numbered("M", 2);
    k.outcome = OutcomeCodec::binary();
    return k;
}

void check_pmf_rows(const std::vector<double>& table, std::size_t width) {
    for (std::size_t i = 0; i < table.size(); i += width) {
        double s = 0.0;
        for (std::size_t j = 0; j < width; ++j) {
            CHECK(table[i + j] >= 0.0);
            s += table[i + j];
        }
        CHECK(std::abs(s - 1.0) <= 1e-12);
    }
}

}  // namespace

TEST_CASE("codecs map labels to indices and back") {
    CategoricalCodec c("M", {"low", "mid", "high"});
    CHECK(c.size() == 3);
    CHECK(c.index_of("mid") == 1u);
    CHECK_FALSE(c.index_of("none").has_value());
    CHECK(c.label(2) == "high");
    CHECK(code_of([] { CategoricalCodec("X", {}); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] { CategoricalCodec("X", {"a", "a"}); }) == ErrorCode::InvalidArgument);

    ProductCodec p({CategoricalCodec::numbered("R1", 2), CategoricalCodec::numbered("R2", 3)});
    CHECK(p.size() == 6);
    for (std::size_t i = 0; i < p.size(); ++i) CHECK(p.compose(p.decompose(i)) == i);
    CHECK(p.compose({1, 0}) == 3);
    CHECK(ProductCodec().size() == 1);

    const CategoricalCodec a = make_exposure_codec("A", "control", "treated");
    CHECK(a.index_of("control") == kBaseline);
    CHECK(a.index_of("treated") == kComparison);
}

TEST_CASE("fit_laws counts the four-record example") {
    DatasetCodecs k = binary_codecs();
    std::vector<Record> recs{{0, 0, 0, 1, 1}, {0, 0, 0, 0, 1}, {0, 1, 0, 1, 1}, {0, 1, 0, 1, 1}};
    const MediationLaw law = fit_laws(Dataset(k, recs));
    CHECK(law.m_marginal(kBaseline)[1] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(law.m_marginal(kComparison)[1] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK_FALSE(law.has_r());
    // M=0 never occurs under a, so that outcome row is undefined.
    CHECK_FALSE(law.y_row_defined(kComparison, 0, 0));
    CHECK(code_of([&] { (void)law.y_prob(kComparison, 0, 0, 1); }) == ErrorCode::UndefinedConditional);
}

TEST_CASE("fit_laws is invariant to weight scaling and record order") {
    Rng rng(11);
    const WorldSpec w = random_world({}, 5);
    const Dataset d = sample_dataset(w, 300, 9);
    const MediationLaw base = fit_laws(d, std::nullopt, ZeroCellPolicy::UniformFallback);

    const Dataset doubled = d.reweighted(std::vector<double>(d.size(), 2.0));
    CHECK(fit_laws(doubled, std::nullopt, ZeroCellPolicy::UniformFallback) == base);

    std::vector<Record> recs = d.records();
    std::reverse(recs.begin(), recs.end());
    const MediationLaw rev = fit_laws(Dataset(d.codecs(), recs), std::nullopt, ZeroCellPolicy::UniformFallback);
    const auto close = [](const std::vector<double>& u, const std::vector<double>& v) {
        for (std::size_t i = 0; i < u.size(); ++i) {
            if (std::abs(u[i] - v[i]) > 1e-14) return false;
        }
        return true;
    };
    CHECK(close(rev.r_table(), base.r_table()));
    CHECK(close(rev.m_table(), base.m_table()));
    CHECK(close(rev.y_table(), base.y_table()));
}

TEST_CASE("every fitted pmf is a valid pmf") {
    RandomWorldOptions o;
    o.r_components = {3};
    o.m_levels = 3;
    o.y_values = {0.0, 0.5, 2.0};
    const WorldSpec w = random_world(o, 17);
    const MediationLaw law = fit_laws(sample_dataset(w, 500, 3), std::nullopt, ZeroCellPolicy::UniformFallback);
    check_pmf_rows(law.r_table(), law.r_levels());
    check_pmf_rows(law.m_table(), law.m_levels());
    check_pmf_rows(law.y_table(), law.y_levels());
    for (std::size_t a = 0; a < 2; ++a) {
        check_pmf_rows(law.m_marginal(a), law.m_levels());
        for (std::size_t m = 0; m < 3; ++m) {
            check_pmf_rows(y_pmf_g_formula(law, m, true), law.y_levels());
            check_pmf_rows(y_pmf_g_formula(law, m, false), law.y_levels());
        }
    }
}

TEST_CASE("fitted cells from 200 records lie within 3 binomial SE of the population law") {
    RandomWorldOptions o;
    o.r_components = {};
    const WorldSpec w = random_world(o, 23);
    const WorldTruth t = enumerate_truth(w);
    const Dataset d = sample_dataset(w, 200, 77);
    const MediationLaw fit = fit_laws(d);
    for (std::size_t a = 0; a < 2; ++a) {
        double n_a = 0.0;
        std::vector<double> n_am(2, 0.0);
        for (const auto& r : d.records()) {
            if (r.a != a) continue;
            n_a += 1.0;
            n_am[r.m] += 1.0;
        }
        for (std::size_t m = 0; m < 2; ++m) {
            const double p = t.population_law.m_prob(a, 0, m);
            CHECK(std::abs(fit.m_prob(a, 0, m) - p) <= 3.0 * std::sqrt(p * (1 - p) / n_a) + 1e-12);
            if (n_am[m] == 0.0) continue;
            const double q = t.population_law.y_prob(a, 0, m, 1);
            CHECK(std::abs(fit.y_prob(a, 0, m, 1) - q) <= 3.0 * std::sqrt(q * (1 - q) / n_am[m]) + 1e-12);
        }
    }
}

TEST_CASE("zero-weight strata and cells follow the configured policy") {
    DatasetCodecs k = binary_codecs();
    k.covariates = ProductCodec({CategoricalCodec::numbered("C", 2)});
    std::vector<Record> recs{{0, 0, 0, 0, 0}, {0, 1, 0, 1, 1}};
    const Dataset d(k, recs);
    CHECK(code_of([&] { (void)fit_laws(d, 1); }) == ErrorCode::EmptyStratum);

    const MediationLaw strict = fit_laws(d, 0, ZeroCellPolicy::Error);
    CHECK_FALSE(strict.y_row_defined(kComparison, 0, 0));
    const MediationLaw lenient = fit_laws(d, 0, ZeroCellPolicy::UniformFallback);
    CHECK(lenient.y_prob(kComparison, 0, 0, 1) == 0.5);
}

TEST_CASE("y_pmf_g_formula mixes over R at the comparison exposure") {
    // Binary R with pr(R=1|a)=0.5, pr(Y=1|m,0,a)=0.2, pr(Y=1|m,1,a)=0.6.
    const LawShape s = make_shape({0.0, 1.0}, 1, {2});
    const MediationLaw law(s, {0.5, 0.5, 0.5, 0.5}, {1.0, 1.0, 1.0, 1.0},
                           {0.5, 0.5, 0.5, 0.5, 0.8, 0.2, 0.4, 0.6});
    CHECK(y_pmf_g_formula(law, 0, true)[1] == doctest::Approx(0.4).epsilon(1e-15));

    // Degenerate R: both routes give the direct row.
    Rng rng(3);
    const MediationLaw flat = random_law(rng, make_shape({0.0, 1.0, 3.0}, 3));
    for (std::size_t m = 0; m < 3; ++m) {
        const auto with = y_pmf_g_formula(flat, m, true);
        const auto without = y_pmf_g_formula(flat, m, false);
        for (std::size_t y = 0; y < 3; ++y) {
            CHECK(with[y] == flat.y_prob(kComparison, 0, m, y));
            CHECK(without[y] == flat.y_prob(kComparison, 0, m, y));
        }
    }
}

TEST_CASE("g-formula on a random 3-level R law matches a brute-force sum") {
    Rng rng(99);
    for (int rep = 0; rep < 50; ++rep) {
        const MediationLaw law = random_law(rng, make_shape({-1.0, 0.0, 2.5}, 3, {3}));
        for (std::size_t m = 0; m < 3; ++m) {
            const auto got = y_pmf_g_formula(law, m, true);
            for (std::size_t y = 0; y < 3; ++y) {
                double want = 0.0;
                for (std::size_t r = 0; r < 3; ++r) {
                    want += law.y_table()[((3 + r) * 3 + m) * 3 + y] * law.r_table()[3 + r];
                }
                CHECK(std::abs(got[y] - want) <= 1e-12);
            }
        }
    }
}

TEST_CASE("CSV ingest assigns roles, levels and weights") {
    std::istringstream in(
        "id,arm,r1,r2,adh,fail,w\n"
        "1,ctl,0,1,low,0,1.5\n"
        "2,trt,1,1,high,1,1\n"
        "3,trt,1,0,low,0,2\n"
        "4,ctl,0,0,high,1,1\n");
    IngestConfig cfg;
    cfg.roles.exposure = "arm";
    cfg.roles.confounders = {"r1", "r2"};
    cfg.roles.mediator = "adh";
    cfg.roles.outcome = "fail";
    cfg.roles.weight = "w";
    cfg.baseline_label = "ctl";
    cfg.comparison_label = "trt";
    cfg.levels["adh"] = {"low", "high"};
    const Dataset d = read_csv_dataset(in, cfg);
    CHECK(d.size() == 4);
    CHECK(d.total_weight() == doctest::Approx(5.5));
    CHECK(d.codecs().confounders.size() == 4);
    CHECK(d.records()[1].a == kComparison);
    CHECK(d.records()[1].r == 3);
    CHECK(d.records()[2].r == 2);
    CHECK(d.records()[1].m == 1);
    CHECK(d.codecs().outcome.values() == std::vector<double>{0.0, 1.0});
}

TEST_CASE("CSV ingest reports missing columns and bad cells") {
    IngestConfig cfg;
    cfg.roles.exposure = "A";
    cfg.roles.mediator = "M";
    cfg.roles.outcome = "Y";
    cfg.baseline_label = "0";
    cfg.comparison_label = "1";
    {
        std::istringstream in("A,M\n0,1\n");
        try {
            (void)read_csv_dataset(in, cfg);
            FAIL("expected MissingColumn");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::MissingColumn);
            CHECK(std::string(e.what()).find("'Y'") != std::string::npos);
        }
    }
    {
        std::istringstream in("A,M,Y\n0,1,0\n2,1,1\n");
        CHECK(code_of([&] { (void)read_csv_dataset(in, cfg); }) == ErrorCode::Parse);
    }
    {
        IngestConfig c2 = cfg;
        c2.y_values = {0.0, 1.0};
        std::istringstream in("A,M,Y\n0,1,0\n1,1,3\n");
        CHECK(code_of([&] { (void)read_csv_dataset(in, c2); }) == ErrorCode::Parse);
    }
    {
        IngestConfig c3 = cfg;
        c3.roles.mediator = "A";
        std::istringstream in("A,M,Y\n0,1,0\n");
        CHECK(code_of([&] { (void)read_csv_dataset(in, c3); }) == ErrorCode::Config);
    }
}

TEST_CASE("CSV round trip through write_csv_dataset preserves the records") {
    RandomWorldOptions o;
    o.r_components = {2, 2};
    o.c_levels = 3;
    const WorldSpec w = random_world(o, 8);
    const Dataset d = sample_dataset(w, 400, 1);
    std::stringstream ss;
    write_csv_dataset(ss, d);
    const Dataset back = read_csv_dataset(ss, ingest_config_for(d.codecs()));
    REQUIRE(back.size() == d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        const Record& x = d.records()[i];
        const Record& y = back.records()[i];
        CHECK((x.c == y.c && x.a == y.a && x.r == y.r && x.m == y.m && x.y == y.y));
    }
}

TEST_CASE("split_csv_line handles quotes") {
    CHECK(split_csv_line("a, b ,\"c,d\",\"e\"\"f\"") ==
          std::vector<std::string>{"a", "b", "c,d", "e\"f"});
    CHECK(code_of([] { (void)split_csv_line("\"open"); }) == ErrorCode::Parse);
}
