#include "crosscheck/facts.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include "crosscheck/errors.hpp"
#include "crosscheck/logic/parser.hpp"

namespace crosscheck {

namespace {

bool valid_symbol(const std::string& s) {
  if (s.empty() || !std::islower(static_cast<unsigned char>(s[0]))) return false;
  for (char c : s) {
    unsigned char u = static_cast<unsigned char>(c);
    if (!(std::islower(u) || std::isdigit(u) || c == '_')) return false;
  }
  return true;
}

std::string lane_symbol(const std::string& lane_id) {
  if (!valid_symbol(lane_id))
    throw ValidationError("lane_id '" + lane_id + "' is not a lowercase symbol");
  return lane_id;
}

} // namespace

std::set<Atom> frame_facts(const FrameRecord& rec) {
  std::set<Atom> atoms;
  std::int64_t f = rec.frame;

  atoms.insert({"ego", {f, to_string(rec.ego.approach), rec.ego.x, rec.ego.y}});

  for (const VehicleState& v : rec.vehicles) {
    std::string action = to_string(classify_action(v.vx, v.vy));
    atoms.insert({"property_vehicle",
                  {f, v.id, action, v.vx, v.vy, v.rot, v.bbox.x1, v.bbox.y1, v.bbox.x2, v.bbox.y2}});
    atoms.insert({"vehicle_in_frame", {f, v.id}});
    atoms.insert({"vehicle_lane", {f, v.id, lane_symbol(v.lane_id)}});
  }
  for (const LightState& l : rec.lights) {
    atoms.insert({"light_observed",
                  {f, l.id, l.intersection_id, to_string(l.approach), to_string(l.color)}});
  }
  for (const IntersectionState& in : rec.intersections) {
    atoms.insert({"property_intersection",
                  {f, in.id, in.bbox.x1, in.bbox.y1, in.bbox.x2, in.bbox.y2}});
  }
  for (const ObstacleState& o : rec.obstacles) {
    atoms.insert({"obstacle_observed", {f, o.id, lane_symbol(o.lane_id)}});
  }
  return atoms;
}

std::vector<FactSet> extract_facts(const FrameLog& log, std::int64_t window) {
  if (window < 1) throw ValidationError("fact window must be >= 1");
  std::vector<std::set<Atom>> per_frame;
  per_frame.reserve(log.size());
  for (const FrameRecord& rec : log) per_frame.push_back(frame_facts(rec));

  std::vector<FactSet> out;
  out.reserve(log.size());
  for (std::size_t f = 0; f < log.size(); ++f) {
    FactSet fs;
    fs.frame_hi = static_cast<std::int64_t>(f);
    fs.frame_lo = std::max<std::int64_t>(0, fs.frame_hi - window + 1);
    for (std::int64_t g = fs.frame_lo; g <= fs.frame_hi; ++g) {
      const auto& src = per_frame[static_cast<std::size_t>(g)];
      fs.atoms.insert(src.begin(), src.end());
    }
    out.push_back(std::move(fs));
  }
  return out;
}

std::string value_to_string(const Value& v) {
  if (std::holds_alternative<std::int64_t>(v)) return std::to_string(std::get<std::int64_t>(v));
  if (std::holds_alternative<std::string>(v)) return std::get<std::string>(v);
  double d = std::get<double>(v);
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), d);
  std::string s(buf, ptr);
  if (s.find('.') == std::string::npos && s.find('e') == std::string::npos &&
      s.find("inf") == std::string::npos && s.find("nan") == std::string::npos)
    s += ".0";
  return s;
}

std::string atom_to_string(const Atom& a) {
  std::string s = a.pred;
  if (!a.args.empty()) {
    s += '(';
    for (std::size_t i = 0; i < a.args.size(); ++i) {
      if (i) s += ", ";
      s += value_to_string(a.args[i]);
    }
    s += ')';
  }
  return s;
}

namespace {

std::int64_t frame_key(const Atom& a) {
  if (!a.args.empty() && std::holds_alternative<std::int64_t>(a.args[0]))
    return std::get<std::int64_t>(a.args[0]);
  return std::numeric_limits<std::int64_t>::min();
}

} // namespace

void write_facts(std::ostream& os, const std::set<Atom>& atoms) {
  std::vector<const Atom*> order;
  order.reserve(atoms.size());
  for (const Atom& a : atoms) order.push_back(&a);
  std::stable_sort(order.begin(), order.end(), [](const Atom* a, const Atom* b) {
    std::int64_t fa = frame_key(*a), fb = frame_key(*b);
    if (fa != fb) return fa < fb;
    return *a < *b;
  });
  for (const Atom* a : order) os << atom_to_string(*a) << ".\n";
}

void write_facts_file(const std::string& path, const std::set<Atom>& atoms) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot open '" + path + "' for writing");
  write_facts(os, atoms);
}

std::set<Atom> read_facts(const std::string& text) {
  logic::Program p = logic::parse_program(text);
  std::set<Atom> atoms;
  for (const logic::Rule& r : p.rules) {
    if (!r.body.empty())
      throw ParseError("fact file: clause for '" + r.head.pred + "' at line " +
                       std::to_string(r.line) + " has a body; facts must be ground atoms");
    Atom a;
    a.pred = r.head.pred;
    for (const logic::Term& t : r.head.args) {
      if (t.kind != logic::Term::Kind::constant)
        throw ParseError("fact file: clause for '" + r.head.pred + "' at line " +
                         std::to_string(r.line) + " contains a variable; facts must be ground");
      a.args.push_back(t.value);
    }
    atoms.insert(std::move(a));
  }
  return atoms;
}

std::set<Atom> read_facts_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ParseError("cannot open fact file '" + path + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  return read_facts(ss.str());
}

} // namespace crosscheck
