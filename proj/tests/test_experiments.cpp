#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "homlab/errors.hpp"
#include "homlab/experiments.hpp"

using namespace homlab;
using nlohmann::json;

namespace {

const std::filesystem::path kSource = HOMLAB_SOURCE_DIR;

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("homlab_test_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

json base_config() {
  return json::parse(R"({
    "coefficients": {"kind": "heat", "sigma": 1.4142135623730951},
    "noise": {"family": "power-decay", "alpha": 0.75, "cutoff": 8},
    "study": {"kind": "converge", "eps": [0.25, 0.125, 0.0625], "M": 1, "T": 0.25, "paths": 8, "batches": 4},
    "seed": 3
  })");
}

bool close(double a, double b, double rel) {
  if (std::isnan(a) || std::isnan(b)) return std::isnan(a) && std::isnan(b);
  return std::abs(a - b) <= rel * std::max({std::abs(a), std::abs(b), 1e-300});
}

}  // namespace

TEST_CASE("config parsing") {
  SUBCASE("named coefficient sets") {
    const auto c = coefficients_from_json("cosine-potential A=0.5");
    CHECK(c.b[1] == cplx(0.0, -0.25));
    const auto h = coefficients_from_json("heat");
    CHECK(h.sigma[0].real() == doctest::Approx(std::sqrt(2.0)));
    CHECK_THROWS_AS(coefficients_from_json("cosine-potential B=1"), Error);
    CHECK_THROWS_AS(coefficients_from_json("nonsense"), Error);
  }
  SUBCASE("explicit Fourier fields") {
    const auto f = field_from_json(json::parse(R"({"mean": 1, "cos": [0.4], "sin": [0, 2]})"));
    CHECK(f[0] == cplx(1.0));
    CHECK(f[1] == cplx(0.2));
    CHECK(f[2] == cplx(0.0, -1.0));
    CHECK(f[-2] == cplx(0.0, 1.0));
    const auto g = field_from_json(json::parse("[[1, 0.5], [-1, 0.5]]"));
    CHECK(g[1] == cplx(0.5));
    CHECK_THROWS_AS(field_from_json(json::parse("[[1, 0.5]]")), Error);  // not real
    const auto c = coefficients_from_json(json::parse(R"({"kind": "fourier", "b": {"sin": [1]}, "sigma": 1})"));
    CHECK(c.b[1] == cplx(0.0, -0.5));
  }
  SUBCASE("study invariants") {
    auto j = base_config();
    j["study"]["eps"] = {0.125, 0.25};
    CHECK_THROWS_AS(ExperimentConfig::from_json(j), Error);
    j = base_config();
    j["study"]["eps"] = {0.3};
    CHECK_THROWS_AS(ExperimentConfig::from_json(j), Error);
    j = base_config();
    j["study"]["paths"] = 1;
    CHECK_THROWS_AS(ExperimentConfig::from_json(j), Error);
    j = base_config();
    j["study"]["unknown"] = 1;
    CHECK_THROWS_AS(ExperimentConfig::from_json(j), Error);
  }
  SUBCASE("per-cell noise cutoff and overrides") {
    auto j = base_config();
    j["noise"]["cutoff_per_cell"] = 4;
    auto cfg = ExperimentConfig::from_json(j);
    CHECK(cfg.noise.cutoff_at(CellRatio(4)) == 16);
    CHECK(cfg.noise.cutoff_at(CellRatio(1)) == 8);
    const auto h = cfg.hash();
    cfg.output = "/elsewhere";
    CHECK(cfg.hash() == h);
    cfg.set("", "seed", 4);
    CHECK(cfg.seed == 4);
    CHECK(cfg.hash() != h);
  }
}

TEST_CASE("batch means") {
  const std::vector<double> v{1, 2, 3, 4, 5, 6, 7, 8};
  const auto m = batch_means(v, 4);
  CHECK(m.mean == doctest::Approx(4.5));
  // batch means 1.5, 3.5, 5.5, 7.5: sd = sqrt(20/3), se = sd / 2
  CHECK(m.se == doctest::Approx(std::sqrt(20.0 / 3.0) / 2.0));
  CHECK(batch_means(v, 100).batches == 8);
}

TEST_CASE("parallel_for covers every index and rethrows the first failure") {
  std::vector<int> hits(100, 0);
  parallel_for(100, 4, [&](int i) { hits[i] += 1; });
  CHECK(std::count(hits.begin(), hits.end(), 1) == 100);
  try {
    parallel_for(10, 3, [](int i) {
      if (i == 7 || i == 4) throw std::runtime_error(std::to_string(i));
    });
    FAIL("expected a rethrow");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()) == "4");
  }
}

TEST_CASE("default Sobolev indices") {
  CHECK(default_sobolev_index(LimitRule::Thm1, 0.75, 0.0) == doctest::Approx(0.5));
  CHECK(default_sobolev_index(LimitRule::Thm1, 0.25, 0.0) == doctest::Approx(1.25));
  CHECK(default_sobolev_index(LimitRule::Thm2, 0.25, 0.0) == doctest::Approx(1.625));
  CHECK(default_sobolev_index(LimitRule::Thm3, 0.0, 0.5) == doctest::Approx(1.0));
}

TEST_CASE("report serialisation") {
  ExperimentReport r;
  r.study = "x";
  r.config_hash = hex64(fnv1a64("abc"));
  r.seed = 9;
  r.put("a", 0.1);
  r.put("b", std::nan(""));
  r.put("c", -INFINITY);
  r.verdicts.push_back(Verdict::check("v", 0.3, ">=", 0.25));
  r.tables.push_back({"t", {"x", "y"}, {{1.0 / 3.0, 1e-300}, {2.0, -0.0}}});
  r.tables.push_back({"empty", {"p", "q", "r"}, {}});
  r.notes.push_back("n");

  SUBCASE("FNV-1a reference value") { CHECK(r.config_hash == "e71fa2190541574b"); }
  SUBCASE("JSON round trip") {
    const auto text = to_json(r).dump(2);
    CHECK(report_from_json(nlohmann::ordered_json::parse(text)) == r);
  }
  SUBCASE("CSV layout") {
    CHECK(to_csv(*r.table("empty")) == "p,q,r\n");
    const auto csv = to_csv(*r.table("t"));
    CHECK(csv.find('\r') == std::string::npos);
    CHECK(csv.substr(0, 4) == "x,y\n");
    CHECK(csv.find("0.3333333333333333,1e-300\n") != std::string::npos);
  }
  SUBCASE("emission is idempotent") {
    const auto dir = scratch("emit");
    const auto files = emit_report(r, dir);
    CHECK(files.size() == 3);
    const auto first = slurp(dir / "report.json");
    emit_report(r, dir);
    CHECK(slurp(dir / "report.json") == first);
    CHECK(slurp(dir / "empty.csv") == "p,q,r\n");
    std::filesystem::remove_all(dir);
  }
  SUBCASE("verdict relations") {
    CHECK(Verdict::check("a", 1.0, "<=", 1.0).passed);
    CHECK_FALSE(Verdict::check("a", 1.0, "<", 1.0).passed);
    CHECK_THROWS_AS(Verdict::check("a", 1.0, "~", 1.0), Error);
  }
}

TEST_CASE("trivial cell gives errors and gaps at the scheme floor") {
  SUBCASE("convergence study") {
    const auto rep = run_thm1_convergence(ExperimentConfig::from_json(base_config()));
    for (const auto& row : rep.table("errors")->rows) CHECK(row[5] < 1e-24);
  }
  SUBCASE("variance study against the classical limit") {
    auto j = base_config();
    j["noise"] = json::parse(R"({"family": "constant-white", "cutoff": 8})");
    j["study"] = json::parse(R"({"kind": "variance", "target": "thm3", "eps": [0.25, 0.125], "T": 2.0})");
    const auto rep = run_variance_study(ExperimentConfig::from_json(j), LimitRule::Thm3);
    for (const auto& row : rep.table("variance")->rows) CHECK(std::abs(row[7]) < 1e-6);
  }
  SUBCASE("semigroup study") {
    auto j = base_config();
    j["study"] = json::parse(R"({"kind": "semigroup", "eps": [0.25, 0.125, 0.0625], "T": 0.5, "half_width": 6})");
    const auto rep = run_semigroup_study(ExperimentConfig::from_json(j));
    CHECK(rep.value("max_remainder") < 1e-12);
    CHECK(rep.verdicts.empty());
  }
}

TEST_CASE("degenerate noise skips the fit") {
  auto j = base_config();
  j["coefficients"] = "cosine-potential";
  j["noise"]["amplitude"] = 0.0;
  const auto rep = run_thm1_convergence(ExperimentConfig::from_json(j));
  for (const auto& row : rep.table("errors")->rows) CHECK(row[5] == 0.0);
  CHECK(rep.verdicts.empty());
  CHECK(rep.notes.back().find("fit skipped") != std::string::npos);
}

TEST_CASE("too few eps values") {
  auto j = base_config();
  j["study"]["eps"] = {0.25, 0.125};
  try {
    run_thm1_convergence(ExperimentConfig::from_json(j));
    FAIL("expected FitFailed");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::FitFailed);
  }
}

TEST_CASE("thm2 study requires centered noise") {
  auto j = base_config();
  j["coefficients"] = "cosine-potential";
  j["noise"] = json::parse(R"({"family": "power-decay", "alpha": 0.5, "cutoff": 16, "base": {"cos": [1.0]}})");
  j["study"] = json::parse(R"({"kind": "variance", "target": "thm2", "eps": [0.25], "T": 1.0})");
  CHECK_THROWS_AS(run_variance_study(ExperimentConfig::from_json(j), LimitRule::Thm2), Error);
  j["noise"]["centered"] = true;
  CHECK_NOTHROW(run_variance_study(ExperimentConfig::from_json(j), LimitRule::Thm2));
}

TEST_CASE("reports are bit-for-bit reproducible") {
  const auto cfg = ExperimentConfig::load(kSource / "configs" / "demo.json");
  const auto a = scratch("repro_a"), b = scratch("repro_b");
  emit_report(run_study(cfg), a);
  auto single = cfg;
  single.set("study", "threads", 1);  // scheduling must not matter
  auto rep = run_study(single);
  rep.config_hash = cfg.hash();
  emit_report(rep, b);
  for (const auto& entry : std::filesystem::directory_iterator(a))
    CHECK(slurp(entry.path()) == slurp(b / entry.path().filename()));
  std::filesystem::remove_all(a);
  std::filesystem::remove_all(b);
}

TEST_CASE("demo config matches the frozen golden report") {
  // Frozen from this implementation; compared to 1e-9 so that the scalar and
  // AVX2 kernel paths (which differ in the last bits) both match.
  const auto cfg = ExperimentConfig::load(kSource / "configs" / "demo.json");
  const auto got = run_study(cfg);
  const auto golden = report_from_json(nlohmann::ordered_json::parse(slurp(kSource / "tests" / "golden" / "demo" / "report.json")));
  CHECK(got.study == golden.study);
  CHECK(got.config_hash == golden.config_hash);
  CHECK(got.seed == golden.seed);
  REQUIRE(got.summary.size() == golden.summary.size());
  for (std::size_t i = 0; i < got.summary.size(); ++i) {
    CHECK(got.summary[i].first == golden.summary[i].first);
    CHECK(close(got.summary[i].second, golden.summary[i].second, 1e-9));
  }
  REQUIRE(got.tables.size() == golden.tables.size());
  for (std::size_t t = 0; t < got.tables.size(); ++t) {
    const auto& g = got.tables[t];
    const auto& h = golden.tables[t];
    CHECK(g.columns == h.columns);
    REQUIRE(g.rows.size() == h.rows.size());
    for (std::size_t i = 0; i < g.rows.size(); ++i)
      for (std::size_t k = 0; k < g.rows[i].size(); ++k) CHECK(close(g.rows[i][k], h.rows[i][k], 1e-9));
    const auto csv = slurp(kSource / "tests" / "golden" / "demo" / (h.name + ".csv"));
    CHECK(csv.substr(0, csv.find('\n')) == to_csv(Table{g.name, g.columns, {}}).substr(0, csv.find('\n')));
  }
  CHECK(got.notes == golden.notes);
  REQUIRE(got.verdicts.size() == golden.verdicts.size());
  for (std::size_t i = 0; i < got.verdicts.size(); ++i) CHECK(got.verdicts[i].passed == golden.verdicts[i].passed);
}
