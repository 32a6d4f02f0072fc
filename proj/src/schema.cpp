#include "monogrove/schema.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

namespace monogrove {

const char* feature_kind_name(FeatureKind k) {
  switch (k) {
    case FeatureKind::Continuous: return "continuous";
    case FeatureKind::Count: return "count";
    case FeatureKind::Binary: return "binary";
  }
  return "?";
}

FeatureKind feature_kind_from_name(const std::string& name) {
  if (name == "continuous") return FeatureKind::Continuous;
  if (name == "count") return FeatureKind::Count;
  if (name == "binary") return FeatureKind::Binary;
  throw SchemaError("unknown feature kind: " + name);
}

int FeatureSchema::index_of(const std::string& name) const {
  for (int i = 0; i < size(); ++i)
    if (features[i].name == name) return i;
  return -1;
}

int FeatureSchema::require(const std::string& name) const {
  int i = index_of(name);
  if (i < 0) throw SchemaError("unknown feature: " + name);
  return i;
}

void FeatureSchema::check() const {
  std::set<std::string> seen;
  for (const Feature& f : features) {
    if (f.name.empty()) throw SchemaError("feature with empty name");
    if (!seen.insert(f.name).second) throw SchemaError("duplicate feature name: " + f.name);
    if (!(f.lo < f.hi))
      throw SchemaError("feature " + f.name + ": domain [" + std::to_string(f.lo) + ", " +
                        std::to_string(f.hi) + "] is empty");
    if (f.kind == FeatureKind::Binary && (f.lo != 0.0 || f.hi != 1.0))
      throw SchemaError("feature " + f.name + ": binary features must have domain {0,1}");
  }
}

namespace {

// DFS cycle check over the strong-pair digraph.
bool has_cycle(int node, const std::vector<std::vector<int>>& adj, std::vector<int>& state) {
  state[node] = 1;
  for (int next : adj[node]) {
    if (state[next] == 1) return true;
    if (state[next] == 0 && has_cycle(next, adj, state)) return true;
  }
  state[node] = 2;
  return false;
}

}  // namespace

void MonotoneSpec::check(const FeatureSchema& schema) const {
  auto present = [&](const std::string& n) {
    if (schema.index_of(n) < 0) throw SchemaError("constraint references unknown feature: " + n);
  };
  for (const auto& n : individual) present(n);
  std::set<std::string> indiv(individual.begin(), individual.end());
  auto check_pair = [&](const std::pair<std::string, std::string>& pr, const char* kind) {
    present(pr.first);
    present(pr.second);
    if (pr.first == pr.second)
      throw SchemaError(std::string(kind) + " pair lists feature " + pr.first + " against itself");
    for (const auto& n : {pr.first, pr.second})
      if (!indiv.count(n))
        throw SchemaError("feature " + n + " appears in a " + kind +
                          " pair but not in the individual list");
  };
  for (const auto& pr : weak_pairs) check_pair(pr, "weak");
  for (const auto& pr : strong_pairs) check_pair(pr, "strong");

  std::vector<std::vector<int>> adj(schema.size());
  for (const auto& pr : strong_pairs)
    adj[schema.require(pr.first)].push_back(schema.require(pr.second));
  std::vector<int> state(schema.size(), 0);
  for (int i = 0; i < schema.size(); ++i)
    if (state[i] == 0 && has_cycle(i, adj, state))
      throw SchemaError("strong pairs contain a cycle through feature " +
                        schema.features[i].name);
}

bool Group::contains(int f) const {
  return std::find(features.begin(), features.end(), f) != features.end();
}

int Group::position_of(int f) const {
  auto it = std::find(features.begin(), features.end(), f);
  return it == features.end() ? -1 : static_cast<int>(it - features.begin());
}

int GroveArchitecture::group_of(int feature) const {
  for (std::size_t g = 0; g < groups.size(); ++g)
    if (groups[g].contains(feature)) return static_cast<int>(g);
  return -1;
}

int GroveArchitecture::num_features() const {
  int n = 0;
  for (const Group& g : groups) n += static_cast<int>(g.features.size());
  return n;
}

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int a) { return parent[a] == a ? a : parent[a] = find(parent[a]); }
  void join(int a, int b) { parent[find(a)] = find(b); }
};

bool both_binary(const FeatureSchema& schema, int a, int b) {
  return schema.features[a].kind == FeatureKind::Binary &&
         schema.features[b].kind == FeatureKind::Binary;
}

}  // namespace

GroveArchitecture derive_groups(const FeatureSchema& schema, const MonotoneSpec& spec,
                                const std::vector<int>& hidden, Activation act) {
  schema.check();
  spec.check(schema);
  const int m = schema.size();

  UnionFind uf(m);
  for (const auto& pr : spec.weak_pairs)
    uf.join(schema.require(pr.first), schema.require(pr.second));
  for (const auto& pr : spec.strong_pairs)
    uf.join(schema.require(pr.first), schema.require(pr.second));

  // Components forced into a joint subnet: those holding a strong pair whose
  // members are not both binary.
  std::vector<char> forced(m, 0);
  for (const auto& pr : spec.strong_pairs) {
    int y = schema.require(pr.first), z = schema.require(pr.second);
    if (!both_binary(schema, y, z)) forced[uf.find(y)] = 1;
  }

  std::vector<std::vector<int>> members(m);
  for (int i = 0; i < m; ++i) members[uf.find(i)].push_back(i);

  GroveArchitecture arch;
  for (int i = 0; i < m; ++i) {
    if (members[i].empty()) continue;
    if (forced[i] && members[i].size() > 1) {
      Group g;
      g.features = members[i];  // already ascending
      g.hidden = hidden;
      g.activation = act;
      arch.groups.push_back(std::move(g));
    } else {
      for (int f : members[i]) {
        Group g;
        g.features = {f};
        g.hidden = hidden;
        g.activation = act;
        arch.groups.push_back(std::move(g));
      }
    }
  }
  std::sort(arch.groups.begin(), arch.groups.end(),
            [](const Group& a, const Group& b) { return a.features.front() < b.features.front(); });
  return arch;
}

std::vector<ArchViolation> validate(const FeatureSchema& schema, const MonotoneSpec& spec,
                                    const GroveArchitecture& arch) {
  std::vector<ArchViolation> out;
  const int m = schema.size();

  std::vector<int> owner(m, -1);
  bool partition_ok = true;
  for (std::size_t g = 0; g < arch.groups.size(); ++g) {
    for (int f : arch.groups[g].features) {
      if (f < 0 || f >= m || owner[f] != -1) {
        partition_ok = false;
        continue;
      }
      owner[f] = static_cast<int>(g);
    }
  }
  for (int i = 0; i < m; ++i)
    if (owner[i] < 0) partition_ok = false;
  if (!partition_ok)
    out.push_back({"not-a-partition", "groups do not partition the feature set", {}});

  // A non-binary strong pair split across groups forces the dominated subnet
  // flat once the dominant derivative touches zero. Checking declared pairs
  // suffices: any split implied pair forces a split declared pair too.
  for (const auto& pr : spec.strong_pairs) {
    int y = schema.require(pr.first), z = schema.require(pr.second);
    if (both_binary(schema, y, z)) continue;
    if (owner[y] < 0 || owner[z] < 0 || owner[y] != owner[z])
      out.push_back({"split-strong-pair",
                     "structural hazard: strong pair (" + pr.first + " over " + pr.second +
                         ") is not carried by one group",
                     {pr.first, pr.second}});
  }

  // A weak pair is enforceable across two singleton subnets but not when a
  // multi-feature group is involved on one side only.
  for (const auto& pr : spec.weak_pairs) {
    int u = schema.require(pr.first), v = schema.require(pr.second);
    if (owner[u] < 0 || owner[v] < 0 || owner[u] == owner[v]) continue;
    bool u_single = arch.groups[owner[u]].features.size() == 1;
    bool v_single = arch.groups[owner[v]].features.size() == 1;
    if (!(u_single && v_single))
      out.push_back({"split-component",
                     "weak pair (" + pr.first + " over " + pr.second +
                         ") spans a multi-feature group; its features belong together",
                     {pr.first, pr.second}});
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> transitive_closure_strong(
    const MonotoneSpec& spec) {
  std::vector<std::string> names;
  auto id = [&](const std::string& n) {
    auto it = std::find(names.begin(), names.end(), n);
    if (it != names.end()) return static_cast<int>(it - names.begin());
    names.push_back(n);
    return static_cast<int>(names.size() - 1);
  };
  for (const auto& pr : spec.strong_pairs) {
    id(pr.first);
    id(pr.second);
  }
  const int n = static_cast<int>(names.size());
  std::vector<std::vector<char>> reach(n, std::vector<char>(n, 0));
  for (const auto& pr : spec.strong_pairs) reach[id(pr.first)][id(pr.second)] = 1;
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      if (reach[i][k])
        for (int j = 0; j < n; ++j)
          if (reach[k][j]) reach[i][j] = 1;
  for (int i = 0; i < n; ++i)
    if (reach[i][i]) throw SchemaError("strong pairs contain a cycle through feature " + names[i]);

  std::vector<std::pair<std::string, std::string>> out;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (reach[i][j]) out.emplace_back(names[i], names[j]);
  return out;
}

namespace {

using nlohmann::json;

Feature feature_from_json(const json& j) {
  Feature f;
  f.name = j.at("name").get<std::string>();
  f.kind = feature_kind_from_name(j.value("kind", std::string("continuous")));
  if (f.kind == FeatureKind::Binary) {
    f.lo = 0.0;
    f.hi = 1.0;
  }
  if (j.contains("domain") && !j["domain"].is_null()) {
    f.lo = j["domain"].at(0).get<double>();
    f.hi = j["domain"].at(1).get<double>();
  } else if (f.kind == FeatureKind::Count) {
    throw IoError("count feature " + f.name + " needs an explicit domain");
  }
  if (j.contains("truncate_at") && !j["truncate_at"].is_null())
    f.truncate_at = j["truncate_at"].get<double>();
  return f;
}

std::vector<std::pair<std::string, std::string>> pairs_from_json(const json& j) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& p : j)
    out.emplace_back(p.at(0).get<std::string>(), p.at(1).get<std::string>());
  return out;
}

}  // namespace

SpecFile parse_spec_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw IoError(std::string("spec file is not valid JSON: ") + e.what());
  }
  SpecFile sf;
  try {
    for (const auto& f : j.at("features")) sf.schema.features.push_back(feature_from_json(f));
    if (j.contains("individual"))
      sf.spec.individual = j["individual"].get<std::vector<std::string>>();
    if (j.contains("weak_pairs")) sf.spec.weak_pairs = pairs_from_json(j["weak_pairs"]);
    if (j.contains("strong_pairs")) sf.spec.strong_pairs = pairs_from_json(j["strong_pairs"]);
    if (j.contains("subnet")) {
      const auto& s = j["subnet"];
      if (s.contains("hidden")) sf.hidden = s["hidden"].get<std::vector<int>>();
      if (s.contains("activation"))
        sf.activation = activation_from_name(s["activation"].get<std::string>());
    }
  } catch (const json::exception& e) {
    throw IoError(std::string("bad spec file: ") + e.what());
  }
  sf.schema.check();
  sf.spec.check(sf.schema);
  return sf;
}

SpecFile load_spec_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open spec file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_spec_json(ss.str());
}

}  // namespace monogrove
