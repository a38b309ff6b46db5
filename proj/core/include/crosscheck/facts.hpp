#pragma once

#include <cstdint>
#include <iosfwd>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "crosscheck/frame.hpp"

namespace crosscheck {

// One constant in a relational atom. Alternatives are ordered (int, float,
// symbol) and compare by type first, so 1 and 1.0 are distinct values.
using Value = std::variant<std::int64_t, double, std::string>;

struct Atom {
  std::string pred;
  std::vector<Value> args;

  auto operator<=>(const Atom&) const = default;
};

// Extensional database for one frame window; set semantics.
struct FactSet {
  std::int64_t frame_lo = 0;
  std::int64_t frame_hi = 0;
  std::set<Atom> atoms;
};

// Relational transcription of one frame:
//   property_vehicle(Frame, Id, Action, Vx, Vy, Rot, X1, Y1, X2, Y2)
//   property_intersection(Frame, Id, X1, Y1, X2, Y2)
//   vehicle_in_frame(Frame, Id)
//   vehicle_lane(Frame, Id, LaneId)
//   light_observed(Frame, LightId, IntersectionId, Approach, Color)
//   obstacle_observed(Frame, Id, LaneId)
//   ego(Frame, Approach, X, Y)
// Numeric arguments carry the frame fields exactly; Action is recomputed
// from the velocity components. Lane ids must be valid lowercase symbols.
std::set<Atom> frame_facts(const FrameRecord& rec);

// One FactSet per frame f, covering frames [max(0, f-window+1), f].
std::vector<FactSet> extract_facts(const FrameLog& log, std::int64_t window = 1);

// Text form: ints plain, floats always with a decimal point or exponent,
// symbols bare. Used for fact files and by the rule pretty-printer.
std::string value_to_string(const Value& v);
std::string atom_to_string(const Atom& a);

// One `pred(args).` per line, ordered by (frame argument, predicate, args).
void write_facts(std::ostream& os, const std::set<Atom>& atoms);
void write_facts_file(const std::string& path, const std::set<Atom>& atoms);

// Reads a fact file: ground bodyless clauses only.
std::set<Atom> read_facts(const std::string& text);
std::set<Atom> read_facts_file(const std::string& path);

} // namespace crosscheck
