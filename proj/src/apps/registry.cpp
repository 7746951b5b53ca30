#include "netbench/apps.hpp"

#include <set>

#include "netbench/core/config.hpp"
#include "netbench/core/error.hpp"
#include "netbench/cp/generator.hpp"
#include "netbench/k8s/generator.hpp"
#include "netbench/routing/generator.hpp"

namespace netbench {

namespace {

void check_keys(App app, const std::map<std::string, std::string>& params, const std::set<std::string>& allowed) {
  for (const auto& [key, value] : params) {
    if (!allowed.contains(key)) {
      throw Error(ErrorCode::kInvalidConfig,
                  "unknown key '" + key + "' in [" + std::string(to_string(app)) + "] section");
    }
  }
}

AppDriver cp_driver(const std::map<std::string, std::string>& params) {
  check_keys(App::kCp, params,
             {"source", "path", "topology_seed", "jupiters", "super_blocks", "agg_blocks", "control_points",
              "switches", "ports", "spine_blocks", "spine_switches"});
  nlohmann::json environment;
  const std::string source = param_string(params, "source", "synthetic");
  if (source == "fixture") {
    const std::string path = param_string(params, "path", "");
    if (path.empty()) throw Error(ErrorCode::kInvalidConfig, "cp source 'fixture' needs a path");
    environment = cp::fixture_environment(path);
  } else if (source == "synthetic") {
    cp::TopologySpec spec;
    auto size = [&](const char* key, int fallback) { return static_cast<int>(param_int(params, key, fallback)); };
    spec.jupiters = size("jupiters", spec.jupiters);
    spec.super_blocks = size("super_blocks", spec.super_blocks);
    spec.agg_blocks = size("agg_blocks", spec.agg_blocks);
    spec.control_points = size("control_points", spec.control_points);
    spec.switches = size("switches", spec.switches);
    spec.ports = size("ports", spec.ports);
    spec.spine_blocks = size("spine_blocks", spec.spine_blocks);
    spec.spine_switches = size("spine_switches", spec.spine_switches);
    environment = cp::synthetic_environment(spec, static_cast<std::uint64_t>(param_int(params, "topology_seed", 0)));
  } else {
    throw Error(ErrorCode::kInvalidConfig, "cp source must be synthetic or fixture, got '" + source + "'");
  }
  cp::CpGraph graph;
  try {
    graph = cp::build_graph(environment);
  } catch (const Error& e) {
    throw Error(ErrorCode::kInvalidConfig, std::string("cannot build the cp topology: ") + e.what());
  }
  auto shared = std::make_shared<const cp::CpGraph>(std::move(graph));
  AppDriver d;
  d.app = App::kCp;
  d.labels = [](int level) { return cp::cp_labels(level); };
  d.generate = [shared, environment](int level, std::uint64_t seed) {
    QueryPair pair = cp::generate_cp_query(*shared, level, seed);
    pair.query.environment = environment;
    return pair;
  };
  d.make_environment = [] { return make_environment(App::kCp); };
  return d;
}

}  // namespace

AppDriver make_driver(App app, const std::map<std::string, std::string>& params) {
  if (app == App::kCp) return cp_driver(params);
  check_keys(app, params, {});
  AppDriver d;
  d.app = app;
  if (app == App::kRouting) {
    d.labels = [](int level) { return routing::routing_labels(level); };
    d.generate = routing::generate_routing_query;
  } else {
    d.labels = [](int level) { return k8s::k8s_labels(level); };
    d.generate = k8s::generate_k8s_query;
  }
  d.make_environment = [app] { return make_environment(app); };
  return d;
}

std::unique_ptr<Environment> make_environment(App app) {
  switch (app) {
    case App::kCp:
      return std::make_unique<cp::CpEnvironment>();
    case App::kRouting:
      return std::make_unique<routing::RoutingEnvironment>();
    case App::kK8s:
      return std::make_unique<k8s::K8sEnvironment>();
  }
  throw Error(ErrorCode::kUnknownApp, "unknown app");
}

}  // namespace netbench
