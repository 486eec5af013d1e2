#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "generators.hpp"
#include "mddthz/harness.hpp"

using namespace mddthz;
using namespace mddthz::testing;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

ExperimentConfig quick_config() {
    ExperimentConfig c;
    c.scenario.n_aps = 8;
    c.scenario.n_devices = 2;
    c.scenario.band.n_fronthaul_subcarriers = 8;
    c.schemes = {Scheme::mdd_ttwl, Scheme::ttw, Scheme::stw};
    c.trials = 3;
    c.seed = 77;
    return c;
}

}  // namespace

TEST_CASE("quantiles interpolate linearly") {
    CHECK(quantile_sorted({1, 2, 3, 4}, 0.5) == doctest::Approx(2.5));
    CHECK(quantile_sorted({1, 2, 3, 4}, 0.0) == 1.0);
    CHECK(quantile_sorted({1, 2, 3, 4}, 1.0) == 4.0);
    CHECK(quantile_sorted({7}, 0.3) == 7.0);
    const auto c = make_cdf({4, 1, 3, 2}, "X");
    CHECK(c.likely50 == doctest::Approx(2.5));
    CHECK(c.likely90 == doctest::Approx(1.3));
    CHECK(c.likely10 == doctest::Approx(3.7));
    CHECK(c.mean == doctest::Approx(2.5));
    CHECK(c.table().back().second == doctest::Approx(1.0));
    CHECK_THROWS(make_cdf({}, "X"));
    CHECK_THROWS(make_cdf({1.0, std::nan("")}, "X"));
}

TEST_CASE("90%-likely rate of uniform samples sits at the 0.1 quantile") {
    Gen g(1234);
    std::vector<double> v(10000);
    for (auto& x : v) x = g.uniform(0.0, 1.0);
    const auto c = make_cdf(v);
    CHECK(std::abs(c.likely90 - 0.1) <= 0.02 * 0.1 + 0.005);
    CHECK(std::abs(c.likely50 - 0.5) <= 0.02);
    CHECK(c.likely(0.9) == doctest::Approx(c.likely90));
}

TEST_CASE("scheme lists parse case-insensitively") {
    CHECK(parse_scheme_list("mdd-ttwl, TTW") == std::vector<Scheme>{Scheme::mdd_ttwl, Scheme::ttw});
    CHECK(parse_scheme_list("all") == all_schemes());
    CHECK_THROWS(parse_scheme_list("MDD,nope"));
    CHECK_THROWS(parse_scheme_list(" , "));
}

TEST_CASE("config files reject unknown keys") {
    std::istringstream in("n_aps = 12\nbogus_key = 3\n");
    KeyValues kv = KeyValues::parse(in);
    ExperimentConfig c;
    CHECK_THROWS_AS(apply_experiment_keys(kv, c), std::invalid_argument);

    std::istringstream ok("n_aps = 12  # comment\nclustering = idsc\nschemes = TTW,STW\n");
    KeyValues kv2 = KeyValues::parse(ok);
    ExperimentConfig c2;
    apply_experiment_keys(kv2, c2);
    CHECK(c2.scenario.n_aps == 12);
    CHECK(c2.scheduler.method == ClusteringMethod::idsc);
    CHECK(c2.schemes.size() == 2);
}

TEST_CASE("shipped desk config matches the built-in defaults") {
    const auto cfg = load_experiment_config(std::string(MDDTHZ_SOURCE_DIR) + "/configs/desk.cfg");
    auto a = experiment_keys(cfg);
    auto b = experiment_keys(ExperimentConfig{});
    for (const char* k : {"trials", "seed"}) {
        a.erase(k);
        b.erase(k);
    }
    CHECK(a == b);
}

TEST_CASE("direct access scheme reports one row per device with access-limited rates") {
    ExperimentConfig c = quick_config();
    c.schemes = {Scheme::stw};
    c.trials = 1;
    const TrialResult t = run_trial(c, 0);
    const auto& r = t.outcomes.at(0).report;
    REQUIRE(static_cast<int>(r.c_end.size()) == c.scenario.n_devices);
    for (std::size_t u = 0; u < r.c_end.size(); ++u) {
        CHECK(r.c_cc[u].unbounded());
        CHECK(r.c_ca[u].unbounded());
        CHECK(r.c_end[u] == doctest::Approx(r.c_ad[u].value()));
    }
}

TEST_CASE("runs are deterministic and independent of the thread count") {
    const fs::path base = fs::temp_directory_path() / "mddthz_unit_det";
    fs::remove_all(base);
    ExperimentConfig c = quick_config();
    c.out_dir = (base / "t1").string();
    c.threads = 1;
    const auto r1 = run_experiment(c);
    c.out_dir = (base / "t2").string();
    c.threads = 2;
    const auto r2 = run_experiment(c);
    for (const char* f : {"rates.csv", "trials.csv", "summary.csv", "cdf_MDD-TTWL.csv"}) {
        INFO(f);
        const auto a = slurp(base / "t1" / f);
        CHECK_FALSE(a.empty());
        CHECK(a == slurp(base / "t2" / f));
    }
    CHECK(fs::exists(base / "t1" / "manifest.json"));
    CHECK(r1.objectives(Scheme::ttw) == r2.objectives(Scheme::ttw));

    // all schemes of a trial see the same channel draw
    std::ifstream rates(base / "t1" / "rates.csv");
    std::string line;
    std::getline(rates, line);
    std::map<std::string, std::set<std::string>> hashes;
    while (std::getline(rates, line)) {
        const auto first = line.substr(0, line.find(','));
        hashes[first].insert(line.substr(line.rfind(',') + 1));
    }
    CHECK(hashes.size() == 3);
    for (const auto& [trial, h] : hashes) CHECK(h.size() == 1);
    fs::remove_all(base);
}

TEST_CASE("trial seeds differ across trials and runs") {
    std::set<std::uint64_t> s;
    for (int i = 0; i < 100; ++i) s.insert(trial_seed(1, i));
    for (int i = 0; i < 100; ++i) s.insert(trial_seed(2, i));
    CHECK(s.size() == 200);
}
