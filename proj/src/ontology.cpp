#include "oapel/ontology.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "oapel/error.hpp"

namespace oapel::ontology {

namespace {

constexpr std::array<std::string_view, 6> kTokens = {
    "volume", "thickness", "sulcal_depth", "curvature", "gyrification_index", "surface_area",
};

bool is_label_char(char c) {
  return !(c == '(' || c == ')' || c == '#' || c == '|' || c == ' ' || c == '\t' || c == '\r' ||
           c == '\n');
}

struct Statement {
  std::string keyword;
  std::vector<std::string> args;
  int line;
};

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  // Returns false at end of input.
  bool next(Statement& out) {
    skip_blank();
    if (pos_ >= text_.size()) return false;
    out.line = line_;
    out.args.clear();
    out.keyword = read_word();
    if (out.keyword.empty()) fail("unexpected character '" + std::string(1, text_[pos_]) + "'");
    if (pos_ >= text_.size() || text_[pos_] != '(') fail("expected '(' after " + out.keyword);
    ++pos_;
    for (;;) {
      skip_inline_space();
      if (pos_ >= text_.size()) fail("unterminated statement " + out.keyword);
      const char c = text_[pos_];
      if (c == ')') {
        ++pos_;
        break;
      }
      if (c == '\n') fail("statement " + out.keyword + " spans lines");
      auto word = read_word();
      if (word.empty()) fail("unexpected character '" + std::string(1, c) + "'");
      out.args.push_back(std::move(word));
    }
    return true;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw DataError("ontology line " + std::to_string(line_) + ": " + msg);
  }

 private:
  void skip_inline_space() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\r')) ++pos_;
  }

  void skip_blank() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == '\n') {
        ++line_;
        ++pos_;
      } else if (c == ' ' || c == '\t' || c == '\r') {
        ++pos_;
      } else if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::string read_word() {
    const auto start = pos_;
    while (pos_ < text_.size() && is_label_char(text_[pos_])) ++pos_;
    return std::string(text_.substr(start, pos_ - start));
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
};

void check_acyclic(const Ontology& onto) {
  std::map<std::string, std::vector<std::string>> parents;
  for (const auto& [child, parent] : onto.subclass_edges) parents[child].push_back(parent);

  // 0 = unvisited, 1 = on stack, 2 = done
  std::map<std::string, int> state;
  for (const auto& root : onto.classes) {
    if (state[root] != 0) continue;
    std::vector<std::pair<std::string, std::size_t>> stack{{root, 0}};
    state[root] = 1;
    while (!stack.empty()) {
      auto& [node, next] = stack.back();
      const auto& ps = parents[node];
      if (next == ps.size()) {
        state[node] = 2;
        stack.pop_back();
        continue;
      }
      const std::string p = ps[next++];
      if (state[p] == 1) throw DataError("ontology: subclass cycle through '" + p + "'");
      if (state[p] == 0) {
        state[p] = 1;
        stack.emplace_back(p, 0);
      }
    }
  }
}

}  // namespace

std::string_view to_token(MetricType m) { return kTokens[static_cast<std::size_t>(m)]; }

MetricType parse_metric(std::string_view token) {
  for (std::size_t i = 0; i < kTokens.size(); ++i)
    if (kTokens[i] == token) return kAllMetrics[i];
  throw DataError("unknown metric type '" + std::string(token) + "'");
}

FeatureDescriptor FeatureDescriptor::make(std::string region, MetricType metric) {
  FeatureDescriptor f;
  f.id = region + "|" + std::string(to_token(metric));
  f.region = std::move(region);
  f.metric = metric;
  return f;
}

Ontology parse_ontology(std::string_view text) {
  Ontology onto;
  Lexer lex(text);
  Statement st;
  bool named = false;
  std::vector<Statement> edges;
  while (lex.next(st)) {
    const auto where = "ontology line " + std::to_string(st.line) + ": ";
    if (st.keyword == "Ontology") {
      if (st.args.size() != 1) throw DataError(where + "Ontology takes one name");
      if (named) throw DataError(where + "duplicate Ontology statement");
      onto.name = st.args[0];
      named = true;
    } else if (st.keyword == "Class") {
      if (st.args.size() != 1) throw DataError(where + "Class takes one label");
      if (!onto.classes.insert(st.args[0]).second)
        throw DataError(where + "duplicate class '" + st.args[0] + "'");
    } else if (st.keyword == "SubClassOf") {
      if (st.args.size() != 2) throw DataError(where + "SubClassOf takes child and parent");
      edges.push_back(st);
    } else {
      throw DataError(where + "unknown statement '" + st.keyword + "'");
    }
  }
  // Edges may precede the declarations they reference.
  for (const auto& e : edges) {
    for (const auto& label : e.args)
      if (!onto.has_class(label))
        throw DataError("ontology line " + std::to_string(e.line) + ": undeclared class '" + label + "'");
    onto.subclass_edges.emplace(e.args[0], e.args[1]);
  }
  check_acyclic(onto);
  return onto;
}

std::string serialize_ontology(const Ontology& onto) {
  std::ostringstream out;
  if (!onto.name.empty()) out << "Ontology(" << onto.name << ")\n";
  for (const auto& c : onto.classes) out << "Class(" << c << ")\n";
  for (const auto& [child, parent] : onto.subclass_edges) out << "SubClassOf(" << child << ' ' << parent << ")\n";
  return out.str();
}

Ontology load_ontology(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open ontology file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_ontology(buf.str());
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

std::vector<FeatureDescriptor> resolve_features(const Ontology& parcellation,
                                                const std::vector<std::string>& feature_ids) {
  std::vector<FeatureDescriptor> out;
  out.reserve(feature_ids.size());
  std::unordered_set<std::string> seen;
  std::vector<std::string> unknown_regions;
  for (const auto& id : feature_ids) {
    const auto bar = id.find('|');
    if (bar == std::string::npos || bar == 0 || bar + 1 == id.size() || id.find('|', bar + 1) != std::string::npos)
      throw DataError("malformed feature id '" + id + "' (expected region|metric)");
    if (!seen.insert(id).second) throw DataError("duplicate feature id '" + id + "'");
    auto region = id.substr(0, bar);
    const auto metric = parse_metric(std::string_view(id).substr(bar + 1));
    if (!parcellation.has_class(region)) unknown_regions.push_back(id);
    out.push_back(FeatureDescriptor::make(std::move(region), metric));
  }
  if (!unknown_regions.empty()) {
    std::string msg = "feature regions not declared in ontology '" + parcellation.name + "':";
    for (const auto& id : unknown_regions) msg += " " + id;
    throw DataError(msg);
  }
  return out;
}

void check_metrics_declared(const Ontology& metrics, const std::vector<FeatureDescriptor>& features) {
  std::set<std::string> missing;
  for (const auto& f : features) {
    std::string token(to_token(f.metric));
    if (!metrics.has_class(token)) missing.insert(token);
  }
  if (!missing.empty()) {
    std::string msg = "metric types not declared in ontology '" + metrics.name + "':";
    for (const auto& m : missing) msg += " " + m;
    throw DataError(msg);
  }
}

OntologyGraph::OntologyGraph(std::vector<FeatureDescriptor> vertices, std::vector<std::uint8_t> adjacency)
    : vertices_(std::move(vertices)), adjacency_(std::move(adjacency)) {}

std::size_t OntologyGraph::degree(std::size_t i) const {
  std::size_t d = 0;
  for (std::size_t j = 0; j < size(); ++j) d += adjacent(i, j);
  return d;
}

std::size_t OntologyGraph::edge_count() const {
  std::size_t e = 0;
  for (std::size_t i = 0; i < size(); ++i)
    for (std::size_t j = i + 1; j < size(); ++j) e += adjacent(i, j);
  return e;
}

std::vector<std::string> OntologyGraph::ids() const {
  std::vector<std::string> out;
  out.reserve(size());
  for (const auto& v : vertices_) out.push_back(v.id);
  return out;
}

OntologyGraph build_graph(const std::vector<FeatureDescriptor>& features) {
  std::unordered_set<std::string> seen;
  for (const auto& f : features)
    if (!seen.insert(f.id).second) throw DataError("duplicate feature id '" + f.id + "'");

  const auto n = features.size();
  std::vector<std::uint8_t> adj(n * n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool linked = features[i].region == features[j].region || features[i].metric == features[j].metric;
      adj[i * n + j] = adj[j * n + i] = linked ? 1 : 0;
    }
  }
  return OntologyGraph(features, std::move(adj));
}

nlohmann::json graph_to_json(const OntologyGraph& g) {
  nlohmann::json edges = nlohmann::json::array();
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t j = i + 1; j < g.size(); ++j)
      if (g.adjacent(i, j)) edges.push_back({i, j});
  return {{"vertices", g.ids()}, {"edges", std::move(edges)}};
}

}  // namespace oapel::ontology
