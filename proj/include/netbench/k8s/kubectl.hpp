#pragma once

#include <string>
#include <string_view>

#include "netbench/core/episode.hpp"
#include "netbench/k8s/policy.hpp"

namespace netbench::k8s {

struct KubectlResult {
  StepKind kind = StepKind::kInvalid;
  std::string output;
};

/// Runs one kubectl command against `policies`.
///
/// Reads: get networkpolicy [name] [-o yaml|json|name|wide], describe
/// networkpolicy [name], get pods/services, and
/// exec <pod> -- nc -z [-u] <service> <port> as a single probe.
/// Writes: apply/create/replace -f - (heredoc, echo pipe, or inline text),
/// patch networkpolicy <name> [--type merge|strategic|json] -p <doc>,
/// delete networkpolicy <name>.
/// Never throws on agent input; `policies` is untouched unless the result
/// is kWrite.
KubectlResult exec_kubectl(PolicySet& policies, std::string_view command);

}  // namespace netbench::k8s
