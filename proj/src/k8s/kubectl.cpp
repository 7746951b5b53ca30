#include "netbench/k8s/kubectl.hpp"

#include <algorithm>
#include <optional>
#include <set>
#include <vector>

#include "netbench/core/error.hpp"
#include "netbench/core/text.hpp"
#include "netbench/k8s/connectivity.hpp"

namespace netbench::k8s {

namespace {

constexpr const char* kKind = "networkpolicy.networking.k8s.io";
constexpr const char* kKinds = "networkpolicies.networking.k8s.io";

struct Failure {
  std::string message;
};

[[noreturn]] void fail(std::string message) { throw Failure{std::move(message)}; }

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

bool is_netpol(std::string_view r) {
  return r == "networkpolicy" || r == "networkpolicies" || r == "netpol" || r == "netpols" ||
         r == kKind || r == kKinds;
}
bool is_pods(std::string_view r) { return r == "pods" || r == "pod" || r == "po"; }
bool is_services(std::string_view r) { return r == "services" || r == "service" || r == "svc"; }

std::string pod_ip(std::size_t i) { return "10.244.0." + std::to_string(10 + i); }
std::string cluster_ip(std::size_t i) { return "10.96." + std::to_string(100 + i) + "." + std::to_string(20 + 3 * i); }

std::size_t service_index(const std::string& name) {
  const auto& all = services();
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (all[i].name == name) return i;
  }
  return all.size();
}

// Flags with values, positionals, and boolean flags, kubectl style.
struct Args {
  std::vector<std::string> positional;
  std::map<std::string, std::string> values;
  std::set<std::string> switches;
  std::vector<std::string> after_dashdash;
};

Args parse_args(const std::vector<std::string>& words, std::size_t from,
                const std::set<std::string>& value_flags, const std::set<std::string>& bool_flags) {
  Args a;
  for (std::size_t i = from; i < words.size(); ++i) {
    const std::string& w = words[i];
    if (w == "--") {
      a.after_dashdash.assign(words.begin() + static_cast<long>(i) + 1, words.end());
      break;
    }
    if (w.size() > 1 && w[0] == '-') {
      std::string flag = w;
      std::optional<std::string> value;
      if (const auto eq = w.find('='); eq != std::string::npos && w.rfind("--", 0) == 0) {
        flag = w.substr(0, eq);
        value = w.substr(eq + 1);
      } else if (w.size() > 2 && w[1] != '-' && value_flags.contains(w.substr(0, 2))) {
        flag = w.substr(0, 2);
        value = w.substr(2);
        if (!value->empty() && (*value)[0] == '=') value = value->substr(1);
      }
      if (value_flags.contains(flag)) {
        if (!value) {
          if (i + 1 >= words.size()) fail("error: flag needs an argument: " + flag);
          value = words[++i];
        }
        a.values[flag] = *value;
      } else if (bool_flags.contains(flag)) {
        a.switches.insert(flag);
      } else {
        fail("error: unknown flag: " + flag);
      }
      continue;
    }
    a.positional.push_back(w);
  }
  return a;
}

std::string flag(const Args& a, std::initializer_list<const char*> names, const std::string& fallback = "") {
  for (const char* n : names) {
    if (const auto it = a.values.find(n); it != a.values.end()) return it->second;
  }
  return fallback;
}

void check_namespace(const Args& a) {
  const std::string ns = flag(a, {"-n", "--namespace"}, "default");
  if (ns != "default") fail("No resources found in " + ns + " namespace.");
}

std::string selector_text(const Selector& s) {
  if (s.match_labels.empty()) return "<none>";
  std::string out;
  for (const auto& [k, v] : s.match_labels) out += (out.empty() ? "" : ",") + k + "=" + v;
  return out;
}

std::string describe(const NetworkPolicy& p) {
  std::string out = "Name:         " + p.name +
                    "\nNamespace:    default\nCreated on:   2025-01-01 00:00:00 +0000 UTC\nLabels:       "
                    "<none>\nAnnotations:  <none>\nSpec:\n  PodSelector:     " +
                    (p.pod_selector.match_labels.empty() ? std::string("<none> (Allowing the specific traffic to all pods in this namespace)")
                                                         : selector_text(p.pod_selector)) +
                    "\n";
  auto section = [&](bool typed, const std::vector<Rule>& rules, const char* dir, const char* peer_word,
                     const char* any_peer) {
    if (!typed) {
      out += std::string("  Not affecting ") + dir + " traffic\n";
      return;
    }
    out += std::string("  Allowing ") + dir + " traffic:\n";
    if (rules.empty()) {
      out += std::string("    <none> (Selected pods are isolated for ") + dir + " connectivity)\n";
      return;
    }
    for (std::size_t i = 0; i < rules.size(); ++i) {
      if (i > 0) out += "    ----------\n";
      const Rule& r = rules[i];
      if (r.ports.empty()) {
        out += "    To Port: <any> (traffic allowed to all ports)\n";
      } else {
        for (const auto& port : r.ports) out += "    To Port: " + std::to_string(port.port) + "/" + port.protocol + "\n";
      }
      if (r.peers.empty()) {
        out += std::string("    ") + peer_word + ": " + any_peer + "\n";
      } else {
        out += std::string("    ") + peer_word + ":\n";
        for (const auto& s : r.peers) out += "      PodSelector: " + selector_text(s) + "\n";
      }
    }
  };
  section(p.ingress_type, p.ingress, "ingress", "From", "<any> (traffic not restricted by source)");
  section(p.egress_type, p.egress, "egress", "To", "<any> (traffic not restricted by destination)");
  std::string types;
  if (p.ingress_type) types = "Ingress";
  if (p.egress_type) types += types.empty() ? "Egress" : ", Egress";
  out += "  Policy Types: " + (types.empty() ? std::string("<none>") : types) + "\n";
  return out;
}

// Splits "networkpolicy/name" or ("networkpolicy", "name") into names.
std::vector<std::string> netpol_names(const std::vector<std::string>& pos, bool allow_empty) {
  if (pos.empty()) fail("error: you must specify the type of resource to get.");
  std::vector<std::string> names;
  std::size_t start = 1;
  if (const auto slash = pos[0].find('/'); slash != std::string::npos) {
    if (!is_netpol(pos[0].substr(0, slash))) fail("error: only networkpolicy resources can be changed here");
    names.push_back(pos[0].substr(slash + 1));
  } else if (!is_netpol(pos[0])) {
    fail("error: the server doesn't have a resource type \"" + pos[0] + "\"");
  }
  for (std::size_t i = start; i < pos.size(); ++i) names.push_back(pos[i]);
  if (names.empty() && !allow_empty) fail("error: resource name may not be empty");
  return names;
}

const NetworkPolicy& lookup(const PolicySet& ps, const std::string& name) {
  const auto it = ps.find(name);
  if (it == ps.end()) fail(std::string("Error from server (NotFound): ") + kKinds + " \"" + name + "\" not found");
  return it->second;
}

class Kubectl {
 public:
  Kubectl(PolicySet& ps, std::vector<std::string> words, std::optional<std::string> stdin_text)
      : ps_(ps), w_(std::move(words)), stdin_(std::move(stdin_text)) {}

  KubectlResult run() {
    if (w_.size() < 2) fail("kubectl controls the Kubernetes cluster manager. Supply a subcommand such as get, describe, apply, patch or delete.");
    const std::string& verb = w_[1];
    if (verb == "get") return get();
    if (verb == "describe") return describe_cmd();
    if (verb == "apply" || verb == "create" || verb == "replace") return apply(verb);
    if (verb == "patch") return patch();
    if (verb == "delete") return remove();
    if (verb == "exec") return exec();
    if (verb == "edit") fail("error: interactive editing is not available here; use kubectl patch or kubectl apply -f -");
    fail("error: unknown or unsupported command \"" + verb + "\" for \"kubectl\"");
  }

 private:
  PolicySet& ps_;
  std::vector<std::string> w_;
  std::optional<std::string> stdin_;

  KubectlResult read(std::string out) { return {StepKind::kRead, std::move(out)}; }

  KubectlResult get() {
    const Args a = parse_args(w_, 2, {"-o", "--output", "-n", "--namespace", "-l", "--selector"},
                              {"-A", "--all-namespaces", "--show-labels"});
    if (!a.switches.contains("-A") && !a.switches.contains("--all-namespaces")) check_namespace(a);
    if (a.positional.empty()) fail("error: you must specify the type of resource to get.");
    const std::string output = flag(a, {"-o", "--output"});
    const std::string& resource = a.positional[0];
    const std::string base = resource.substr(0, resource.find('/'));
    if (is_pods(base)) return read(get_pods(a.switches.contains("--show-labels") || output == "wide", output == "wide"));
    if (is_services(base)) return read(get_services());
    if (base == "namespaces" || base == "namespace" || base == "ns") return read("NAME      STATUS   AGE\ndefault   Active   10d\n");
    if (base == "all") return read(get_pods(false, false) + "\n" + get_services());
    const auto names = netpol_names(a.positional, true);

    std::vector<const NetworkPolicy*> selected;
    if (names.empty()) {
      for (const auto& [n, p] : ps_) selected.push_back(&p);
      if (selected.empty()) return read("No resources found in default namespace.");
    } else {
      for (const auto& n : names) selected.push_back(&lookup(ps_, n));
    }

    if (output == "yaml") {
      std::string out;
      for (const auto* p : selected) out += (out.empty() ? "" : "---\n") + emit_yaml(*p);
      return read(out);
    }
    if (output == "json") {
      if (selected.size() == 1 && !names.empty()) return read(to_json(*selected[0]).dump(4) + "\n");
      nlohmann::json items = nlohmann::json::array();
      for (const auto* p : selected) items.push_back(to_json(*p));
      return read(nlohmann::json{{"apiVersion", "v1"}, {"kind", "List"}, {"items", items}}.dump(4) + "\n");
    }
    if (output == "name") {
      std::string out;
      for (const auto* p : selected) out += std::string(kKind) + "/" + p->name + "\n";
      return read(out);
    }
    if (!output.empty() && output != "wide") fail("error: unable to match a printer suitable for the output format \"" + output + "\"");
    std::size_t width = 4;
    for (const auto* p : selected) width = std::max(width, p->name.size());
    std::string out = pad("NAME", width + 3) + pad("POD-SELECTOR", 30) + "AGE\n";
    for (const auto* p : selected) out += pad(p->name, width + 3) + pad(selector_text(p->pod_selector), 30) + "10d\n";
    return read(out);
  }

  std::string get_pods(bool labels, bool wide) {
    std::string out = pad("NAME", 28) + "READY   STATUS    RESTARTS   AGE" + (wide ? "   IP          " : "") +
                      (labels ? "   LABELS" : "") + "\n";
    const auto& all = services();
    for (std::size_t i = 0; i < all.size(); ++i) {
      out += pad(all[i].name, 28) + "1/1     Running   0          10d" + (wide ? "   " + pad(pod_ip(i), 12) : "") +
             (labels ? "   app=" + all[i].name : "") + "\n";
    }
    return out;
  }

  std::string get_services() {
    std::string out = pad("NAME", 28) + pad("TYPE", 11) + pad("CLUSTER-IP", 16) + "PORT(S)     AGE\n";
    const auto& all = services();
    for (std::size_t i = 0; i < all.size(); ++i) {
      if (!all[i].port) continue;
      out += pad(all[i].name, 28) + pad("ClusterIP", 11) + pad(cluster_ip(i), 16) +
             pad(std::to_string(*all[i].port) + "/" + all[i].protocol, 12) + "10d\n";
    }
    return out;
  }

  KubectlResult describe_cmd() {
    const Args a = parse_args(w_, 2, {"-n", "--namespace"}, {});
    check_namespace(a);
    const auto names = netpol_names(a.positional, true);
    std::string out;
    if (names.empty()) {
      for (const auto& [n, p] : ps_) out += (out.empty() ? "" : "\n\n") + describe(p);
    } else {
      for (const auto& n : names) out += (out.empty() ? "" : "\n\n") + describe(lookup(ps_, n));
    }
    return read(out);
  }

  KubectlResult apply(const std::string& verb) {
    const Args a = parse_args(w_, 2, {"-f", "--filename", "-n", "--namespace"}, {});
    check_namespace(a);
    if (!a.positional.empty()) fail("error: unexpected arguments: " + text::join(a.positional, " "));
    const std::string source = flag(a, {"-f", "--filename"});
    if (source.empty()) fail("error: must specify one of -f and -k");
    std::string body;
    if (source == "-") {
      if (!stdin_) fail("error: no objects passed to " + verb + " (use a heredoc: kubectl " + verb + " -f - <<EOF ... EOF)");
      body = *stdin_;
    } else if (source.find('\n') != std::string::npos || source.rfind("apiVersion", 0) == 0 || source[0] == '{') {
      body = source;
    } else {
      fail("error: the path \"" + source + "\" does not exist");
    }
    std::vector<NetworkPolicy> docs;
    try {
      docs = parse_policies(body);
    } catch (const Error& e) {
      fail(std::string("error: error validating data: ") + e.what());
    }
    std::string out;
    for (const auto& p : docs) {
      const auto it = ps_.find(p.name);
      std::string status;
      if (verb == "create") {
        if (it != ps_.end()) fail(std::string("Error from server (AlreadyExists): ") + kKinds + " \"" + p.name + "\" already exists");
        status = "created";
      } else if (verb == "replace") {
        if (it == ps_.end()) fail(std::string("Error from server (NotFound): ") + kKinds + " \"" + p.name + "\" not found");
        status = "replaced";
      } else {
        status = it == ps_.end() ? "created" : (it->second == p ? "unchanged" : "configured");
      }
      ps_[p.name] = p;
      out += (out.empty() ? "" : "\n") + std::string(kKind) + "/" + p.name + " " + status;
    }
    return {StepKind::kWrite, out};
  }

  KubectlResult patch() {
    const Args a = parse_args(w_, 2, {"-p", "--patch", "--type", "-n", "--namespace"}, {});
    check_namespace(a);
    const auto names = netpol_names(a.positional, false);
    if (names.size() != 1) fail("error: patch takes exactly one networkpolicy name");
    const std::string doc = flag(a, {"-p", "--patch"});
    if (doc.empty()) fail("error: must specify -p to patch");
    const std::string type = flag(a, {"--type"}, "strategic");
    NetworkPolicy& target = const_cast<NetworkPolicy&>(lookup(ps_, names[0]));
    nlohmann::json patch_doc;
    try {
      patch_doc = yaml_to_json(doc);
    } catch (const Error& e) {
      fail(std::string("error: unable to parse \"") + doc + "\": " + e.what());
    }
    nlohmann::json object = to_json(target);
    if (type == "merge" || type == "strategic") {
      if (!patch_doc.is_object()) fail("error: a merge patch must be a mapping");
      object.merge_patch(patch_doc);
    } else if (type == "json") {
      if (!patch_doc.is_array()) fail("error: a json patch must be a list of operations");
      try {
        object = object.patch(patch_doc);
      } catch (const nlohmann::json::exception& e) {
        fail(std::string("The request is invalid: ") + e.what());
      }
    } else {
      fail("error: --type must be one of [json merge strategic], got '" + type + "'");
    }
    NetworkPolicy next;
    try {
      next = policy_from_json(object);
    } catch (const Error& e) {
      fail(std::string("The NetworkPolicy \"") + target.name + "\" is invalid: " + e.what());
    }
    if (next.name != target.name) fail("error: metadata.name cannot be changed by a patch");
    const bool same = next == target;
    target = next;
    return {StepKind::kWrite, std::string(kKind) + "/" + target.name + " patched" + (same ? " (no change)" : "")};
  }

  KubectlResult remove() {
    const Args a = parse_args(w_, 2, {"-n", "--namespace"}, {"--all"});
    check_namespace(a);
    auto names = netpol_names(a.positional, a.switches.contains("--all"));
    if (a.switches.contains("--all")) {
      names.clear();
      for (const auto& [n, p] : ps_) names.push_back(n);
      if (names.empty()) fail("No resources found");
    }
    std::string out;
    for (const auto& n : names) {
      lookup(ps_, n);
      ps_.erase(n);
      out += (out.empty() ? "" : "\n") + std::string(kKind) + " \"" + n + "\" deleted";
    }
    return {StepKind::kWrite, out};
  }

  KubectlResult exec() {
    const Args a = parse_args(w_, 2, {"-n", "--namespace", "-c", "--container"},
                              {"-i", "-t", "-it", "-ti", "--stdin", "--tty"});
    check_namespace(a);
    if (a.positional.size() != 1) fail("error: expected 'exec POD -- COMMAND [args...]'");
    std::string pod = a.positional[0];
    if (const auto slash = pod.find('/'); slash != std::string::npos) pod = pod.substr(slash + 1);
    if (!find_service(pod)) fail(std::string("Error from server (NotFound): pods \"") + pod + "\" not found");
    const auto& cmd = a.after_dashdash;
    if (cmd.empty()) fail("error: you must specify at least one command for the container");
    if (cmd[0] != "nc") fail("error: only nc is available in the debug container");
    bool udp = false;
    std::vector<std::string> pos;
    for (std::size_t i = 1; i < cmd.size(); ++i) {
      const std::string& t = cmd[i];
      if (t == "-w" || t == "-W") {
        ++i;
      } else if (t.size() > 1 && t[0] == '-') {
        if (t.find('u') != std::string::npos) udp = true;
        if (t.find_first_not_of("-zvnuw0123456789") != std::string::npos) fail("nc: invalid option -- '" + t + "'");
      } else {
        pos.push_back(t);
      }
    }
    if (pos.size() != 2) fail("usage: nc [-zv] [-u] [-w timeout] host port");
    const std::string host = pos[0].substr(0, pos[0].find('.'));
    const Service* dst = find_service(host);
    if (!dst) fail("nc: getaddrinfo for host \"" + pos[0] + "\" port " + pos[1] + ": Name or service not known");
    int port = 0;
    try {
      port = std::stoi(pos[1]);
    } catch (const std::exception&) {
      fail("nc: port number invalid: " + pos[1]);
    }
    const std::string proto = udp ? "UDP" : "TCP";
    const std::string ip = cluster_ip(service_index(host));
    const Triple t{pod, host, port};
    const bool allowed = pod != host && connects(ps_, t, proto);
    const bool listening = dst->port == port && dst->protocol == proto;
    const std::string lower = udp ? "udp" : "tcp";
    if (allowed && listening) {
      return read("Connection to " + host + " (" + ip + ") " + std::to_string(port) + " port [" + lower + "/*] succeeded!");
    }
    if (allowed) {
      return read("nc: connect to " + host + " (" + ip + ") port " + std::to_string(port) + " (" + lower +
                  ") failed: Connection refused\ncommand terminated with exit code 1");
    }
    return read("nc: connect to " + host + " (" + ip + ") port " + std::to_string(port) + " (" + lower +
                ") timed out: Operation now in progress\ncommand terminated with exit code 1");
  }
};

// Unquoted shell metacharacters that would chain or redirect commands.
std::optional<std::string> unquoted_meta(std::string_view s) {
  char quote = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (quote) {
      if (c == quote) quote = 0;
      else if (c == '\\' && quote == '"') ++i;
      continue;
    }
    if (c == '\\') {
      ++i;
    } else if (c == '\'' || c == '"') {
      quote = c;
    } else if (c == ';' || c == '&' || c == '`' || c == '>' || c == '<' || c == '|' ||
               (c == '$' && i + 1 < s.size() && s[i + 1] == '(')) {
      return std::string(1, c);
    }
  }
  return std::nullopt;
}

// Position of the first unquoted '|'.
std::size_t unquoted_pipe(std::string_view s) {
  char quote = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (quote) {
      if (c == quote) quote = 0;
      continue;
    }
    if (c == '\'' || c == '"') quote = c;
    if (c == '|') return i;
  }
  return std::string_view::npos;
}

std::string unescape(const std::string& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\\' && i + 1 < s.size()) {
      const char n = s[++i];
      out += n == 'n' ? '\n' : n == 't' ? '\t' : n;
    } else {
      out += s[i];
    }
  }
  return out;
}

struct Prepared {
  std::string header;
  std::optional<std::string> stdin_text;
};

Prepared prepare(const std::string& cmd) {
  Prepared p;
  const auto nl = cmd.find('\n');
  const std::string first = cmd.substr(0, nl);
  if (const auto here = first.find("<<"); here != std::string::npos) {
    std::string delim = text::trim(first.substr(here + 2));
    if (!delim.empty() && delim[0] == '-') delim = text::trim(delim.substr(1));
    std::string rest;
    if (const auto sp = delim.find_first_of(" \t|"); sp != std::string::npos) {
      rest = delim.substr(sp);
      delim = delim.substr(0, sp);
    }
    if (delim.size() >= 2 && (delim.front() == '\'' || delim.front() == '"') && delim.back() == delim.front()) {
      delim = delim.substr(1, delim.size() - 2);
    }
    if (delim.empty()) fail("error: heredoc delimiter missing after <<");
    std::string header = text::trim(first.substr(0, here) + rest);
    if (const auto bar = unquoted_pipe(header); bar != std::string::npos) {
      if (text::trim(header.substr(0, bar)) != "cat") fail("error: only 'cat <<EOF | kubectl ...' pipelines are supported");
      header = text::trim(header.substr(bar + 1));
    }
    std::string body;
    bool closed = false;
    std::string after;
    if (nl != std::string::npos) {
      const auto lines = text::split_lines(cmd.substr(nl + 1));
      for (std::size_t i = 0; i < lines.size(); ++i) {
        if (!closed && text::trim(lines[i]) == delim) {
          closed = true;
          continue;
        }
        if (closed) after += lines[i];
        else body += lines[i] + "\n";
      }
    }
    if (!text::trim(after).empty()) fail("error: send exactly one command per turn");
    p.header = header;
    p.stdin_text = body;
    return p;
  }
  if (const auto bar = unquoted_pipe(cmd); bar != std::string::npos) {
    const auto left = text::shell_words(cmd.substr(0, bar));
    if (!left || left->empty() || ((*left)[0] != "echo" && (*left)[0] != "printf")) {
      fail("error: pipelines are limited to 'echo ... | kubectl apply -f -'");
    }
    std::vector<std::string> parts(left->begin() + 1, left->end());
    bool escapes = (*left)[0] == "printf";
    if (!parts.empty() && (parts[0] == "-e" || parts[0] == "-n")) {
      escapes = escapes || parts[0] == "-e";
      parts.erase(parts.begin());
    }
    const std::string joined = text::join(parts, " ");
    p.stdin_text = escapes ? unescape(joined) : joined;
    p.header = text::trim(cmd.substr(bar + 1));
    return p;
  }
  p.header = cmd;
  return p;
}

}  // namespace

KubectlResult exec_kubectl(PolicySet& policies, std::string_view command) {
  const std::string cmd = text::trim(command);
  if (cmd.empty()) return {StepKind::kInvalid, "error: empty command"};
  try {
    const Prepared prepared = prepare(cmd);
    const std::string first_line = prepared.header.substr(0, prepared.header.find('\n'));
    if (const auto meta = unquoted_meta(prepared.stdin_text ? prepared.header : first_line)) {
      fail("error: shell operator '" + *meta + "' is not supported; send exactly one kubectl command");
    }
    const auto words = text::shell_words(prepared.header);
    if (!words || words->empty()) fail("error: unterminated quote in command");
    if ((*words)[0] == "sudo") fail("error: do not use sudo; kubectl already has cluster access");
    if ((*words)[0] != "kubectl") fail("error: only kubectl commands are available in this environment");
    PolicySet scratch = policies;
    Kubectl k(scratch, *words, prepared.stdin_text);
    KubectlResult result = k.run();
    if (result.kind == StepKind::kWrite) policies = std::move(scratch);
    return result;
  } catch (const Failure& f) {
    return {StepKind::kInvalid, f.message};
  } catch (const std::exception& e) {
    return {StepKind::kInvalid, std::string("error: ") + e.what()};
  }
}

}  // namespace netbench::k8s
