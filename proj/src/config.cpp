#include "conespec/config.hpp"

#include "conespec/error.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace conespec {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw Error(ErrorKind::io, "config field '" + field + "': " + what);
}

const json& member(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.is_object()) fail(where, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) fail(where.empty() ? key : where + "." + key, "missing");
  return *it;
}

double number(const json& j, const std::string& field) {
  if (!j.is_number()) fail(field, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(field, "not finite");
  return v;
}

std::vector<double> numbers(const json& j, const std::string& field, std::size_t count = 0) {
  if (!j.is_array()) fail(field, "expected an array");
  if (count && j.size() != count) fail(field, "expected " + std::to_string(count) + " numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], field + "[" + std::to_string(i) + "]"));
  return out;
}

std::string text(const json& j, const std::string& field) {
  if (!j.is_string()) fail(field, "expected a string");
  return j.get<std::string>();
}

Domain parse_domain(const json& j) {
  const std::string kind = text(member(j, "kind", "domain"), "domain.kind");
  if (kind == "interval")
    return Domain::interval(number(member(j, "lo", "domain"), "domain.lo"), number(member(j, "hi", "domain"), "domain.hi"));
  if (kind == "polygon") {
    const auto& rs = member(j, "rectangles", "domain");
    if (!rs.is_array()) fail("domain.rectangles", "expected an array");
    std::vector<Rect> rects;
    for (std::size_t i = 0; i < rs.size(); ++i) {
      const auto v = numbers(rs[i], "domain.rectangles[" + std::to_string(i) + "]", 4);
      rects.push_back({v[0], v[1], v[2], v[3]});
    }
    return Domain::polygon(rects);
  }
  if (kind == "circles") {
    const auto& cs = member(j, "circles", "domain");
    if (!cs.is_array()) fail("domain.circles", "expected an array");
    std::vector<Circle> circles;
    for (std::size_t i = 0; i < cs.size(); ++i) {
      const std::string f = "domain.circles[" + std::to_string(i) + "]";
      const auto c = numbers(member(cs[i], "center", f), f + ".center", 2);
      circles.push_back({Eigen::Vector2d(c[0], c[1]), number(member(cs[i], "radius", f), f + ".radius")});
    }
    return Domain::circles(circles);
  }
  if (kind == "dumbbell") return DumbbellComponent::make_domain(number(member(j, "vartheta", "domain"), "domain.vartheta"));
  fail("domain.kind", "unknown kind '" + kind + "'");
}

std::vector<double> read_table_csv(const std::filesystem::path& path, std::vector<double>& values, const std::string& f) {
  std::ifstream in(path);
  if (!in) fail(f, "cannot open '" + path.string() + "'");
  std::vector<double> xs;
  std::string line;
  int row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::istringstream ls(line);
    double x, d;
    char comma;
    if (!(ls >> x >> comma >> d) || comma != ',') {
      if (row == 1) continue;  // header
      fail(f, path.string() + " line " + std::to_string(row) + ": expected 'x,density'");
    }
    xs.push_back(x);
    values.push_back(d);
  }
  return xs;
}

ComponentPtr parse_component(const json& j, const Domain& domain, const std::filesystem::path& base, const std::string& f) {
  const std::string kind = text(member(j, "kind", f), f + ".kind");
  if (kind == "gaussian") {
    const auto& m = member(j, "mean", f);
    const double sd = number(member(j, "sd", f), f + ".sd");
    if (m.is_number()) return std::make_shared<GaussianComponent>(Eigen::Vector2d(number(m, f + ".mean"), 0), sd, 1);
    const auto v = numbers(m, f + ".mean");
    if (v.size() == 1) return std::make_shared<GaussianComponent>(Eigen::Vector2d(v[0], 0), sd, 1);
    if (v.size() == 2) return std::make_shared<GaussianComponent>(Eigen::Vector2d(v[0], v[1]), sd, 2);
    fail(f + ".mean", "expected one or two coordinates");
  }
  if (kind == "uniform") {
    if (j.contains("interval")) {
      const auto v = numbers(j["interval"], f + ".interval", 2);
      return UniformComponent::on_interval(v[0], v[1]);
    }
    if (j.contains("box")) {
      const auto v = numbers(j["box"], f + ".box", 4);
      Box b;
      b.lo = {v[0], v[1]};
      b.hi = {v[2], v[3]};
      return UniformComponent::on_box(domain, b);
    }
    if (j.contains("arc")) {
      const auto& a = j["arc"];
      const std::string g = f + ".arc";
      const double idx = number(member(a, "circle", g), g + ".circle");
      if (idx != std::floor(idx) || idx < 0) fail(g + ".circle", "expected a circle index");
      return UniformComponent::on_arc(domain, static_cast<int>(idx), number(member(a, "from", g), g + ".from"),
                                      number(member(a, "to", g), g + ".to"));
    }
    fail(f, "uniform component needs 'interval', 'box' or 'arc'");
  }
  if (kind == "dumbbell_left" || kind == "dumbbell_right") {
    const std::string part = j.contains("partition") ? text(j["partition"], f + ".partition") : "good";
    const std::string prof = j.contains("profile") ? text(j["profile"], f + ".profile") : "normalized";
    if (part != "good" && part != "bad") fail(f + ".partition", "expected 'good' or 'bad'");
    if (prof != "normalized" && prof != "raw") fail(f + ".profile", "expected 'normalized' or 'raw'");
    using D = DumbbellComponent;
    return std::make_shared<D>(number(member(j, "vartheta", f), f + ".vartheta"), number(member(j, "width", f), f + ".width"),
                               part == "good" ? D::Partition::good : D::Partition::bad,
                               kind == "dumbbell_left" ? D::Side::left : D::Side::right,
                               prof == "normalized" ? D::Profile::normalized : D::Profile::raw);
  }
  if (kind == "table") {
    std::vector<double> xs, values;
    if (j.contains("csv")) {
      std::filesystem::path p = text(j["csv"], f + ".csv");
      if (p.is_relative()) p = base / p;
      xs = read_table_csv(p, values, f + ".csv");
    } else if (j.contains("points")) {
      const auto& pts = j["points"];
      if (!pts.is_array()) fail(f + ".points", "expected an array");
      for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto v = numbers(pts[i], f + ".points[" + std::to_string(i) + "]", 2);
        xs.push_back(v[0]);
        values.push_back(v[1]);
      }
    } else {
      fail(f, "table component needs 'csv' or 'points'");
    }
    return std::make_shared<TableComponent>(xs, values);
  }
  fail(f + ".kind", "unknown kind '" + kind + "'");
}

}  // namespace

MixtureModel parse_model(const nlohmann::json& config, const std::filesystem::path& base_dir) {
  if (!config.is_object()) fail("", "expected a JSON object");
  const Domain domain = [&] {
    try {
      return parse_domain(member(config, "domain", ""));
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::io) throw;
      fail("domain", e.what());
    }
  }();
  const auto& cs = member(config, "components", "");
  if (!cs.is_array()) fail("components", "expected an array");
  std::vector<ComponentPtr> components;
  for (std::size_t i = 0; i < cs.size(); ++i) {
    const std::string f = "components[" + std::to_string(i) + "]";
    try {
      components.push_back(parse_component(cs[i], domain, base_dir, f));
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::io) throw;
      fail(f, e.what());
    }
  }
  const auto weights = numbers(member(config, "weights", ""), "weights");
  if (config.contains("c_M") && !(number(config["c_M"], "c_M") > 0)) fail("c_M", "must be positive");
  try {
    return MixtureModel(domain, components, weights);
  } catch (const Error& e) {
    fail("model", e.what());
  }
}

nlohmann::json read_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open config '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string content = buffer.str();
  try {
    return nlohmann::json::parse(content);
  } catch (const nlohmann::json::parse_error& e) {
    int line = 1, column = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < content.size(); ++i) {
      if (content[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw Error(ErrorKind::io, path.string() + ":" + std::to_string(line) + ":" + std::to_string(column) +
                                   ": malformed JSON");
  }
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"gaussian-pair", "dumbbell", "two-circles", "uniform-circle"};
  return names;
}

nlohmann::json preset_config(const std::string& name, const PresetOptions& o) {
  constexpr double pi = std::numbers::pi;
  if (name == "gaussian-pair") {
    if (!(o.gamma >= 0)) throw Error(ErrorKind::invalid_argument, "gaussian-pair offset must be non-negative");
    return {{"domain", {{"kind", "interval"}, {"lo", -12.0}, {"hi", o.gamma + 12.0}}},
            {"components",
             {{{"kind", "gaussian"}, {"mean", 0.0}, {"sd", 1.0}}, {{"kind", "gaussian"}, {"mean", o.gamma}, {"sd", 1.0}}}},
            {"weights", {0.5, 0.5}}};
  }
  if (name == "dumbbell") {
    if (o.partition != "good" && o.partition != "bad")
      throw Error(ErrorKind::invalid_argument, "dumbbell partition must be 'good' or 'bad'");
    json left{{"kind", "dumbbell_left"}, {"vartheta", o.vartheta}, {"width", o.width}, {"partition", o.partition}};
    json right = left;
    right["kind"] = "dumbbell_right";
    return {{"domain", {{"kind", "dumbbell"}, {"vartheta", o.vartheta}}},
            {"components", {left, right}},
            {"weights", {0.5, 0.5}}};
  }
  if (name == "two-circles") {
    return {{"domain",
             {{"kind", "circles"},
              {"circles", {{{"center", {0.0, 0.0}}, {"radius", 1.0}}, {{"center", {3.0, 0.0}}, {"radius", 1.0}}}}}},
            {"components",
             {{{"kind", "uniform"}, {"arc", {{"circle", 0}, {"from", 0.0}, {"to", 2 * pi}}}},
              {{"kind", "uniform"}, {"arc", {{"circle", 1}, {"from", 0.0}, {"to", 2 * pi}}}}}},
            {"weights", {0.5, 0.5}}};
  }
  if (name == "uniform-circle") {
    return {{"domain", {{"kind", "circles"}, {"circles", {{{"center", {0.0, 0.0}}, {"radius", 1.0}}}}}},
            {"components",
             {{{"kind", "uniform"}, {"arc", {{"circle", 0}, {"from", 0.0}, {"to", pi}}}},
              {{"kind", "uniform"}, {"arc", {{"circle", 0}, {"from", pi}, {"to", 2 * pi}}}}}},
            {"weights", {0.5, 0.5}}};
  }
  throw Error(ErrorKind::invalid_argument, "unknown preset '" + name + "'");
}

}  // namespace conespec
