#pragma once

#include <map>
#include <memory>
#include <string>

#include "netbench/core/batch.hpp"
#include "netbench/core/episode.hpp"

namespace netbench {

/// Driver for one application. `params` are the config's app-table keys:
/// cp accepts source (synthetic|fixture), path, topology_seed and the
/// TopologySpec sizes (jupiters, super_blocks, agg_blocks, control_points,
/// switches, ports, spine_blocks, spine_switches); routing and k8s take none.
/// Throws kInvalidConfig for unknown keys or unusable values.
AppDriver make_driver(App app, const std::map<std::string, std::string>& params = {});

std::unique_ptr<Environment> make_environment(App app);

}  // namespace netbench
