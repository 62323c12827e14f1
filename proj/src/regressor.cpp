#include "roughbattery/errors.hpp"
#include "roughbattery/regressor.hpp"

namespace roughbattery::models {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double predict_row(const RegressorModel& model, std::span<const double> x) {
  return std::visit(overloaded{
                        [&](const MlpNetwork& m) { return mlp_forward(m, x); },
                        [&](const LinearModel& m) { return m.predict(x); },
                        [&](const GbtEnsemble& m) { return m.predict(x); },
                    },
                    model);
}

}  // namespace

std::size_t input_width(const RegressorModel& model) {
  return std::visit(overloaded{
                        [](const MlpNetwork& m) { return m.input_width(); },
                        [](const LinearModel& m) { return m.coefficients.size(); },
                        [](const GbtEnsemble& m) { return m.input_width; },
                    },
                    model);
}

std::vector<double> predict(const RegressorModel& model, const Matrix& x, Exec exec) {
  if (x.cols() != input_width(model)) {
    throw DataError("input has " + std::to_string(x.cols()) + " features, model expects " +
                    std::to_string(input_width(model)));
  }
  std::vector<double> out(x.rows());
  const auto n = static_cast<std::ptrdiff_t>(x.rows());
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t r = 0; r < n; ++r) {
      out[static_cast<std::size_t>(r)] = predict_row(model, x.row(static_cast<std::size_t>(r)));
    }
  } else {
    for (std::size_t r = 0; r < x.rows(); ++r) out[r] = predict_row(model, x.row(r));
  }
  return out;
}

nlohmann::json model_to_json(const RegressorModel& model) {
  using nlohmann::json;
  json j = std::visit(
      overloaded{
          [](const MlpNetwork& m) {
            json layers = json::array();
            for (const auto& l : m.layers) {
              layers.push_back({{"in", l.in}, {"out", l.out}, {"weights", l.weights}, {"bias", l.bias}});
            }
            return json{{"kind", "mlp"}, {"layers", layers}};
          },
          [](const LinearModel& m) {
            return json{{"kind", "linear"},
                        {"coefficients", m.coefficients},
                        {"intercept", m.intercept},
                        {"ridge", m.ridge},
                        {"regularized", m.regularized}};
          },
          [](const GbtEnsemble& m) {
            json trees = json::array();
            for (const auto& t : m.trees) {
              json nodes = json::array();
              for (const auto& n : t.nodes) {
                nodes.push_back({{"feature", n.feature},
                                 {"threshold", n.threshold},
                                 {"left", n.left},
                                 {"right", n.right},
                                 {"weight", n.weight},
                                 {"samples", n.samples}});
              }
              trees.push_back({{"nodes", nodes}});
            }
            return json{{"kind", "gbt"},
                        {"base_score", m.base_score},
                        {"input_width", m.input_width},
                        {"config",
                         {{"rounds", m.config.rounds},
                          {"max_depth", m.config.max_depth},
                          {"learning_rate", m.config.learning_rate},
                          {"lambda", m.config.lambda},
                          {"min_samples_leaf", m.config.min_samples_leaf}}},
                        {"trees", trees}};
          },
      },
      model);
  j["schema_version"] = kModelSchemaVersion;
  return j;
}

RegressorModel model_from_json(const nlohmann::json& j) {
  try {
    if (j.at("schema_version").get<int>() != kModelSchemaVersion) {
      throw SchemaError("unsupported model schema version " + j.at("schema_version").dump());
    }
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "mlp") {
      MlpNetwork net;
      for (const auto& l : j.at("layers")) {
        DenseLayer layer{l.at("in").get<std::size_t>(), l.at("out").get<std::size_t>(),
                         l.at("weights").get<std::vector<double>>(), l.at("bias").get<std::vector<double>>()};
        if (layer.weights.size() != layer.in * layer.out || layer.bias.size() != layer.out) {
          throw SchemaError("mlp layer parameter count does not match its shape");
        }
        if (!net.layers.empty() && net.layers.back().out != layer.in) {
          throw SchemaError("mlp layer shapes are not compatible");
        }
        net.layers.push_back(std::move(layer));
      }
      if (net.layers.empty()) throw SchemaError("mlp has no layers");
      return net;
    }
    if (kind == "linear") {
      return LinearModel{j.at("coefficients").get<std::vector<double>>(), j.at("intercept").get<double>(),
                         j.at("ridge").get<double>(), j.at("regularized").get<bool>()};
    }
    if (kind == "gbt") {
      GbtEnsemble m;
      m.base_score = j.at("base_score").get<double>();
      m.input_width = j.at("input_width").get<std::size_t>();
      const auto& c = j.at("config");
      m.config = {c.at("rounds").get<std::size_t>(), c.at("max_depth").get<std::size_t>(),
                  c.at("learning_rate").get<double>(), c.at("lambda").get<double>(),
                  c.at("min_samples_leaf").get<std::size_t>()};
      for (const auto& t : j.at("trees")) {
        RegressionTree tree;
        for (const auto& n : t.at("nodes")) {
          tree.nodes.push_back({n.at("feature").get<int>(), n.at("threshold").get<double>(),
                                n.at("left").get<int>(), n.at("right").get<int>(), n.at("weight").get<double>(),
                                n.at("samples").get<std::size_t>()});
        }
        m.trees.push_back(std::move(tree));
      }
      return m;
    }
    throw SchemaError("unknown model kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed model document: ") + e.what());
  }
}

}  // namespace roughbattery::models
