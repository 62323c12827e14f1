#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include "doctest.h"
#include "roughbattery/cli.hpp"
#include "roughbattery/config.hpp"
#include "roughbattery/errors.hpp"
#include "roughbattery/experiment.hpp"
#include "roughbattery/metrics.hpp"
#include "roughbattery/report.hpp"
#include "support.hpp"

using namespace roughbattery;
using namespace roughbattery::eval;
namespace fs = std::filesystem;

namespace {

ExperimentConfig fast_config() {
  ExperimentConfig c;
  c.mlp.hidden = {16, 8};
  c.mlp.epochs = 5;
  c.gbt.rounds = 10;
  return c;
}

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("roughbattery_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun run(std::vector<std::string> args) {
  args.insert(args.begin(), "roughbattery");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = roughbattery::cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST_SUITE("eval.metrics") {
  TEST_CASE("hand-computed fixture") {
    const std::vector<double> obs{1, 3}, pred{2, 5};
    const auto m = compute_metrics(obs, pred);
    CHECK(m.mae == 1.5);
    CHECK(m.mse == 2.5);
    CHECK(m.rmse == doctest::Approx(1.5811).epsilon(1e-4));
    CHECK(m.n == 2);
  }

  TEST_CASE("perfect and mean predictors") {
    const std::vector<double> obs{1, 4, 2, 8};
    const auto perfect = compute_metrics(obs, obs);
    CHECK(perfect.mae == 0.0);
    CHECK(perfect.mse == 0.0);
    CHECK(perfect.rmse == 0.0);
    CHECK(*perfect.tvs == 1.0);
    CHECK(*perfect.r2 == 1.0);
    const std::vector<double> mean(4, 3.75);
    CHECK(*compute_metrics(obs, mean).tvs == doctest::Approx(0.0));
  }

  TEST_CASE("constant observations leave TVS and R2 undefined") {
    const std::vector<double> obs{2, 2, 2}, pred{1, 2, 3};
    const auto m = compute_metrics(obs, pred);
    CHECK_FALSE(m.tvs.has_value());
    CHECK_FALSE(m.r2.has_value());
    CHECK(to_json(m)["tvs"].is_null());
  }

  TEST_CASE("input errors") {
    const std::vector<double> a{1, 2}, b{1};
    CHECK_THROWS_AS(compute_metrics(a, b), DataError);
    CHECK_THROWS_AS(compute_metrics(std::vector<double>{}, std::vector<double>{}), DataError);
    const std::vector<double> nan{1, std::nan("")};
    CHECK_THROWS_AS(compute_metrics(a, nan), DataError);
  }

  TEST_CASE("properties on random vectors") {
    Rng rng(1);
    for (int trial = 0; trial < 500; ++trial) {
      const std::size_t n = 1 + rng.below(40);
      const double scale = std::exp(rng.uniform(-6, 6));
      const auto obs = testsupport::random_vector(rng, n, scale);
      const auto pred = testsupport::random_vector(rng, n, scale);
      const auto m = compute_metrics(obs, pred);
      CHECK(std::abs(m.rmse * m.rmse - m.mse) <= 1e-12 * m.mse);
      CHECK(m.mae <= m.rmse * (1 + 1e-12));
      if (m.tvs) CHECK(*m.tvs <= 1.0);

      auto shifted_obs = obs, shifted_pred = pred;
      const double c = rng.uniform(-10, 10) * scale;
      for (auto& v : shifted_obs) v += c;
      for (auto& v : shifted_pred) v += c;
      const auto s = compute_metrics(shifted_obs, shifted_pred);
      if (m.tvs && s.tvs) CHECK(*s.tvs == doctest::Approx(*m.tvs).epsilon(1e-6));

      std::vector<std::size_t> order(n);
      std::iota(order.begin(), order.end(), 0);
      rng.shuffle(order);
      std::vector<double> po(n), pp(n);
      for (std::size_t i = 0; i < n; ++i) {
        po[i] = obs[order[i]];
        pp[i] = pred[order[i]];
      }
      const auto p = compute_metrics(po, pp);
      CHECK(p.mae == doctest::Approx(m.mae).epsilon(1e-12));
      CHECK(p.mse == doctest::Approx(m.mse).epsilon(1e-12));
    }
  }
}

TEST_SUITE("eval.split") {
  TEST_CASE("deterministic, sized and disjoint") {
    const auto a = train_test_split(10, 0.2, 7);
    const auto b = train_test_split(10, 0.2, 7);
    CHECK(a.train == b.train);
    CHECK(a.test == b.test);
    CHECK(a.test.size() == 2);
    CHECK(a.train.size() == 8);
    std::set<std::size_t> all(a.train.begin(), a.train.end());
    all.insert(a.test.begin(), a.test.end());
    CHECK(all.size() == 10);
  }

  TEST_CASE("two rows split one each side") {
    const auto s = train_test_split(2, 0.5, 3);
    CHECK(s.train.size() == 1);
    CHECK(s.test.size() == 1);
  }

  TEST_CASE("degenerate sizes rejected") {
    CHECK_THROWS_AS(train_test_split(1, 0.5, 1), DataError);
    CHECK_THROWS_AS(train_test_split(10, 0.0, 1), DataError);
    CHECK_THROWS_AS(train_test_split(10, 1.0, 1), DataError);
    CHECK_THROWS_AS(train_test_split(10, 0.01, 1), DataError);
    CHECK_THROWS_AS(train_test_split(3, 0.9, 1), DataError);
  }
}

TEST_SUITE("eval.experiment") {
  TEST_CASE("linear model on planted data explains most variance") {
    auto cfg = fast_config();
    cfg.model = ModelKind::linear;
    cfg.use_roughsets = false;
    const auto r = run_experiment(tabular::synth_generate(1000, 1), cfg);
    REQUIRE(r.metrics.tvs.has_value());
    CHECK(*r.metrics.tvs > 0.5);
    CHECK(r.features_before == r.features_after);
    CHECK(r.observed.size() == 200);
  }

  TEST_CASE("reduction keeps the planted signal columns") {
    auto cfg = fast_config();
    cfg.model = ModelKind::linear;
    const auto r = run_experiment(tabular::synth_generate(1000, 2), cfg);
    const auto& kept = r.pipeline.retained;
    CHECK(std::find(kept.begin(), kept.end(), "Water Temperature") != kept.end());
    CHECK(std::find(kept.begin(), kept.end(), "Wave Height") != kept.end());
    CHECK(std::any_of(kept.begin(), kept.end(), [](const auto& k) { return k.starts_with("Beach Name="); }));
    CHECK(r.features_after <= r.features_before);
  }

  TEST_CASE("same config and seed give identical metrics") {
    const auto table = tabular::synth_generate(300, 3);
    for (auto kind : {ModelKind::mlp, ModelKind::linear, ModelKind::gbt}) {
      auto cfg = fast_config();
      cfg.model = kind;
      CHECK(run_experiment(table, cfg).metrics == run_experiment(table, cfg).metrics);
    }
  }

  TEST_CASE("leakage guard: deleting a test row changes no fitted statistic") {
    const auto table = tabular::synth_generate(200, 4);
    auto cfg = fast_config();
    cfg.model = ModelKind::linear;
    const auto split = train_test_split(table.num_rows(), cfg.test_ratio, cfg.seed);
    const auto base = run_experiment(table, cfg, split);
    for (std::size_t k = 0; k < split.test.size(); k += 7) {
      const std::size_t dropped = split.test[k];
      std::vector<std::size_t> keep;
      for (std::size_t r = 0; r < table.num_rows(); ++r) {
        if (r != dropped) keep.push_back(r);
      }
      const auto smaller = table.select_rows(keep);
      auto remap = [&](std::size_t r) { return r > dropped ? r - 1 : r; };
      Split s2;
      for (auto r : split.train) s2.train.push_back(remap(r));
      for (auto r : split.test) {
        if (r != dropped) s2.test.push_back(remap(r));
      }
      const auto again = run_experiment(smaller, cfg, s2);
      CHECK(again.pipeline.scaler == base.pipeline.scaler);
      CHECK(again.pipeline.retained == base.pipeline.retained);
      CHECK(std::get<models::LinearModel>(again.model) == std::get<models::LinearModel>(base.model));
    }
  }

  TEST_CASE("stage errors carry the stage name") {
    auto cfg = fast_config();
    cfg.target = "Nope";
    try {
      run_experiment(tabular::synth_generate(50, 1), cfg);
      FAIL("expected StageError");
    } catch (const StageError& e) {
      CHECK(e.stage() == "prepare");
    }
    cfg = fast_config();
    cfg.model = ModelKind::gbt;
    cfg.gbt.min_samples_leaf = 100;
    try {
      run_experiment(tabular::synth_generate(50, 1), cfg);
      FAIL("expected StageError");
    } catch (const StageError& e) {
      CHECK(e.stage() == "train");
    }
  }

  TEST_CASE("unseen test label is reported by the encode stage") {
    const auto base = tabular::synth_generate(20, 5);
    auto rows = base.rows();
    const auto beach = base.column_index("Beach Name");
    for (auto& row : rows) row[beach] = std::string("Calumet Beach");
    const auto split = train_test_split(rows.size(), 0.2, 42);
    rows[split.test[0]][beach] = std::string("Rainbow Beach");
    auto cfg = fast_config();
    cfg.model = ModelKind::linear;
    cfg.use_roughsets = false;
    try {
      run_experiment(tabular::DataTable(base.schema(), rows), cfg, split);
      FAIL("expected StageError");
    } catch (const StageError& e) {
      CHECK(e.stage() == "encode");
      CHECK(std::string(e.what()).find("Rainbow Beach") != std::string::npos);
    }
  }

  TEST_CASE("numeric columns can be treated as categorical") {
    auto cfg = fast_config();
    cfg.model = ModelKind::linear;
    cfg.use_roughsets = false;
    cfg.treat_numeric_as_categorical = true;
    cfg.ridge = 1e-3;
    const auto base = tabular::synth_generate(200, 6);
    const std::vector<std::string> keep{"Beach Name", "Wave Period", "Battery Life"};
    auto rows = base.select_columns(keep).rows();
    for (auto& row : rows) row[1] = std::floor(std::get<double>(row[1]));  // periods 1..9
    const auto r = run_experiment(tabular::DataTable(base.select_columns(keep).schema(), rows), cfg);
    CHECK(r.features_before == 6 + 9);
  }

  TEST_CASE("compare runs six cells on one split") {
    const auto table = tabular::synth_generate(200, 7);
    const auto t = compare_models(table, fast_config());
    REQUIRE(t.rows.size() == 6);
    const std::vector<std::string> labels{"MLP + Rough sets",  "MLP", "Linear Regression + Rough sets",
                                          "Linear Regression", "GBT + Rough sets", "GBT"};
    for (std::size_t i = 0; i < 6; ++i) {
      CHECK(t.rows[i].label == labels[i]);
      CHECK(t.rows[i].error.empty());
      CHECK(t.rows[i].metrics.has_value());
      CHECK(t.rows[i].observed.size() == t.split.test.size());
    }
    for (std::size_t i = 0; i < 6; i += 2) {
      CHECK(t.rows[i].features_after <= t.rows[i + 1].features_after);
      CHECK(t.rows[i].observed == t.rows[i + 1].observed);
    }
    auto serial = fast_config();
    serial.exec = Exec::serial;
    CHECK(render(compare_models(table, serial), fast_config(), ReportFormat::json) ==
          render(t, fast_config(), ReportFormat::json));
  }

  TEST_CASE("a failing cell is recorded and the rest still run") {
    auto cfg = fast_config();
    cfg.gbt.min_samples_leaf = 200;
    const auto t = compare_models(tabular::synth_generate(200, 8), cfg);
    for (const auto& row : t.rows) {
      if (row.model == ModelKind::gbt) {
        CHECK_FALSE(row.error.empty());
        CHECK_FALSE(row.metrics.has_value());
      } else {
        CHECK(row.error.empty());
      }
    }
  }
}

TEST_SUITE("eval.report") {
  TEST_CASE("proposed-row formatting fixture") {
    MetricsReport m;
    m.mae = 5.16;
    m.mse = 35.68;
    m.rmse = 5.85;
    m.tvs = 0.11;
    const auto row = markdown_row("MLP + Rough sets", m, 206, 182);
    CHECK(row.find("| 5.16 | 35.68 | 5.85 | 0.11 |") != std::string::npos);
    CHECK(markdown_header().starts_with("| Model Used | MAE | MSE | RMSE | TVS |"));
    m.tvs.reset();
    CHECK(markdown_row("x", m, 1, 1).find("| n/a |") != std::string::npos);
  }

  TEST_CASE("emission is byte-stable and JSON agrees with markdown at two decimals") {
    const auto table = compare_models(tabular::synth_generate(150, 9), fast_config());
    const auto cfg = fast_config();
    for (auto f : {ReportFormat::json, ReportFormat::markdown, ReportFormat::csv}) {
      CHECK(render(table, cfg, f) == render(table, cfg, f));
    }
    const auto j = nlohmann::json::parse(render(table, cfg, ReportFormat::json));
    CHECK(j.contains("config"));
    CHECK(j["seed"] == cfg.seed);
    const auto md = render(table, cfg, ReportFormat::markdown);
    const std::regex row_re(R"(\| ([^|]+) \| ([-0-9.]+) \| ([-0-9.]+) \| ([-0-9.]+) \| ([-0-9.]+|n/a) \| (\d+) \| (\d+) \|)");
    std::size_t matched = 0;
    for (auto it = std::sregex_iterator(md.begin(), md.end(), row_re); it != std::sregex_iterator(); ++it) {
      const auto& m = *it;
      const auto& row = j["rows"][matched];
      CHECK(row["label"] == m[1].str());
      CHECK(std::abs(std::stod(m[2].str()) - row["metrics"]["mae"].get<double>()) <= 0.005 + 1e-12);
      CHECK(std::abs(std::stod(m[3].str()) - row["metrics"]["mse"].get<double>()) <= 0.005 + 1e-12);
      CHECK(std::abs(std::stod(m[4].str()) - row["metrics"]["rmse"].get<double>()) <= 0.005 + 1e-12);
      CHECK(std::stoul(m[6].str()) == row["features_before"].get<std::size_t>());
      ++matched;
    }
    CHECK(matched == 6);
  }

  TEST_CASE("unwritable destination is an IoError") {
    ComparisonTable t;
    CHECK_THROWS_AS(emit_report(t, fast_config(), ReportFormat::json, "/nonexistent/dir/x.json"), IoError);
  }

  TEST_CASE("prediction csv loads back") {
    const std::vector<double> o{1.5, 2.0}, p{1.25, 2.5};
    std::istringstream in(render_predictions_csv(o, p, fast_config(), "GBT"));
    const auto records = tabular::read_csv_records(in);
    REQUIRE(records.size() == 3);
    CHECK(records[0].fields == std::vector<std::string>{"observed", "predicted"});
    CHECK(records[2].fields == std::vector<std::string>{"2", "2.5"});
  }
}

TEST_SUITE("eval.config") {
  TEST_CASE("run config sections override defaults") {
    std::istringstream in(
        "[pipeline]\nroughsets = off\nthreshold = 0.05\nbins = 4\nratio = 0.25\nseed = 9\n"
        "[model]\nkind = gbt\n[mlp]\nhidden = 3, 2\n[gbt]\nrounds = 7\n");
    config::RunConfig rc;
    config::apply_run_config(in, rc);
    const auto& e = rc.experiment;
    CHECK_FALSE(e.use_roughsets);
    CHECK(e.threshold == 0.05);
    CHECK(e.discretization.bins_per_feature == 4);
    CHECK(e.test_ratio == 0.25);
    CHECK(e.seed == 9);
    CHECK(rc.seed_from_file);
    CHECK(e.model == ModelKind::gbt);
    CHECK(e.mlp.hidden == std::vector<std::size_t>{3, 2});
    CHECK(e.gbt.rounds == 7);
  }

  TEST_CASE("unknown keys, sections and bad values are rejected") {
    config::RunConfig rc;
    std::istringstream a("[pipeline]\nbogus = 1\n");
    CHECK_THROWS_AS(config::apply_run_config(a, rc), SchemaError);
    std::istringstream b("[other]\nx = 1\n");
    CHECK_THROWS_AS(config::apply_run_config(b, rc), SchemaError);
    std::istringstream c("[pipeline]\nratio = half\n");
    CHECK_THROWS_AS(config::apply_run_config(c, rc), SchemaError);
    std::istringstream d("[pipeline\nratio = 1\n");
    CHECK_THROWS_AS(config::apply_run_config(d, rc), ParseError);
  }

  TEST_CASE("shipped schema files match the built-in schemas") {
    const fs::path dir = ROUGHBATTERY_CONFIG_DIR;
    const auto beach = config::load_schema(dir / "beach.schema");
    CHECK(beach.columns == tabular::beach_schema());
    CHECK(beach.csv.missing_sentinels == std::vector<std::string>{"NA"});
    CHECK(config::load_schema(dir / "beach_portal.schema").columns == tabular::beach_portal_schema());
    config::RunConfig rc;
    config::load_run_config(dir / "default.ini", rc);
    CHECK(rc.schema == dir / "beach.schema");
    const ExperimentConfig defaults;
    CHECK(to_json(rc.experiment) == to_json(defaults));
  }
}

TEST_SUITE("eval.cli") {
  TEST_CASE("synth twice gives identical bytes") {
    const auto dir = scratch_dir("synth");
    const auto a = run({"synth", "--rows", "100", "--seed", "7", "-o", (dir / "a.csv").string()});
    const auto b = run({"synth", "--rows", "100", "--seed", "7", "-o", (dir / "b.csv").string()});
    CHECK(a.code == 0);
    CHECK(b.code == 0);
    CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
    CHECK(slurp(dir / "a.csv").starts_with("# synth: {\"rows\":100,\"seed\":7}"));
  }

  TEST_CASE("missing dataset exits 2 and writes nothing") {
    const auto dir = scratch_dir("missing");
    const auto r = run({"evaluate", "--data", (dir / "absent.csv").string(), "-o", (dir / "m.json").string()});
    CHECK(r.code == 2);
    CHECK_FALSE(r.err.empty());
    CHECK(fs::is_empty(dir));
  }

  TEST_CASE("usage errors exit 1") {
    CHECK(run({}).code == 1);
    CHECK(run({"frobnicate"}).code == 1);
    CHECK(run({"synth", "--bogus"}).code == 1);
    CHECK(run({"evaluate", "--model", "forest"}).code == 1);
    CHECK(run({"evaluate"}).code == 1);
    CHECK(run({"--help"}).code == 0);
  }

  TEST_CASE("bad config values exit 2") {
    const auto dir = scratch_dir("badcfg");
    { std::ofstream(dir / "d.csv") << ""; }
    CHECK(run({"evaluate", "--data", (dir / "d.csv").string(), "--ratio", "1.5"}).code == 2);
  }

  TEST_CASE("environment seed is a fallback only") {
    const auto dir = scratch_dir("envseed");
    ::setenv("ROUGHBATTERY_SEED", "5", 1);
    CHECK(run({"synth", "--rows", "3", "-o", (dir / "env.csv").string()}).code == 0);
    CHECK(run({"synth", "--rows", "3", "--seed", "6", "-o", (dir / "flag.csv").string()}).code == 0);
    ::unsetenv("ROUGHBATTERY_SEED");
    CHECK(slurp(dir / "env.csv").find("\"seed\":5") != std::string::npos);
    CHECK(slurp(dir / "flag.csv").find("\"seed\":6") != std::string::npos);
  }

  TEST_CASE("validate, preprocess, reduce, train and evaluate write stamped artifacts") {
    const auto dir = scratch_dir("pipeline");
    const auto data = (dir / "d.csv").string();
    REQUIRE(run({"synth", "--rows", "120", "--seed", "3", "-o", data}).code == 0);
    const auto before = slurp(data);

    auto v = run({"validate", "--data", data});
    CHECK(v.code == 0);
    CHECK(nlohmann::json::parse(v.out)["total_violations"] == 0);

    CHECK(run({"preprocess", "--data", data, "--out", (dir / "pre").string()}).code == 0);
    CHECK(nlohmann::json::parse(slurp(dir / "pre" / "pipeline.json")).contains("seed"));
    CHECK(slurp(dir / "pre" / "preprocessed.csv").starts_with("# config: "));

    CHECK(run({"reduce", "--data", data, "--out", (dir / "red").string(), "--seed", "11"}).code == 0);
    const auto reduct = nlohmann::json::parse(slurp(dir / "red" / "reduct.json"));
    CHECK(reduct["seed"] == 11);
    CHECK(reduct["features_after"].get<std::size_t>() <= reduct["features_before"].get<std::size_t>());

    const std::vector<std::string> small{"--data", data, "--model", "gbt"};
    auto args = small;
    args.insert(args.begin(), "train");
    args.insert(args.end(), {"--out", (dir / "train").string()});
    CHECK(run(args).code == 0);
    const auto model = nlohmann::json::parse(slurp(dir / "train" / "model.json"));
    CHECK(model["model"]["kind"] == "gbt");
    CHECK(model["config"]["model"] == "gbt");
    CHECK(slurp(dir / "train" / "loss_trace.csv").find("step,loss") != std::string::npos);

    args = small;
    args.insert(args.begin(), "evaluate");
    const auto e1 = run(args);
    const auto e2 = run(args);
    CHECK(e1.code == 0);
    CHECK(e1.out == e2.out);
    CHECK(nlohmann::json::parse(e1.out).contains("tvs"));

    CHECK(slurp(data) == before);
  }

  TEST_CASE("multi-file subcommands need an output directory") {
    const auto dir = scratch_dir("noout");
    const auto data = (dir / "d.csv").string();
    REQUIRE(run({"synth", "--rows", "50", "-o", data}).code == 0);
    CHECK(run({"reduce", "--data", data}).code == 1);
  }

  TEST_CASE("config file is read and flags override it") {
    const auto dir = scratch_dir("cfgfile");
    const auto data = (dir / "d.csv").string();
    REQUIRE(run({"synth", "--rows", "80", "-o", data}).code == 0);
    {
      std::ofstream(dir / "run.ini") << "[data]\npath = d.csv\n[model]\nkind = linear\n[pipeline]\nseed = 4\n";
    }
    const auto r = run({"evaluate", "--config", (dir / "run.ini").string(), "--seed", "8"});
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["config"]["model"] == "linear");
    CHECK(j["seed"] == 8);
  }
}
