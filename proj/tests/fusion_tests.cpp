#include <cstdint>
#include <string>
#include <vector>

#include "crosscheck/errors.hpp"
#include "crosscheck/fusion.hpp"
#include "crosscheck/logic/parser.hpp"
#include "crosscheck/noise.hpp"
#include "crosscheck/simulator.hpp"
#include "crosscheck/world_config.hpp"
#include "doctest.h"
#include "support/oracle.hpp"
#include "support/test_env.hpp"

using namespace crosscheck;

namespace {

Value I(std::int64_t v) { return Value{v}; }

Atom ego_atom(std::int64_t f, const std::string& approach, double x, double y) {
  return {"ego", {I(f), approach, x, y}};
}

Atom intersection_atom(std::int64_t f, std::int64_t id, Rect b) {
  return {"property_intersection", {I(f), I(id), b.x1, b.y1, b.x2, b.y2}};
}

Atom light_atom(std::int64_t f, std::int64_t id, std::int64_t int_id, const std::string& approach,
                const std::string& color) {
  return {"light_observed", {I(f), I(id), I(int_id), approach, color}};
}

// Vehicle with a 4.5 x 2 bbox centered at (cx, cy).
Atom vehicle_atom(std::int64_t f, std::int64_t id, const std::string& action, double rot, double cx,
                  double cy) {
  double vx = action == "moving" ? 5.0 : 0.0;
  return {"property_vehicle",
          {I(f), I(id), action, vx, 0.0, rot, cx - 2.25, cy - 1.0, cx + 2.25, cy + 1.0}};
}

Atom lane_atom(std::int64_t f, std::int64_t id, const std::string& lane) {
  return {"vehicle_lane", {I(f), I(id), lane}};
}

FactSet facts_of(std::vector<Atom> atoms) {
  FactSet fs;
  for (Atom& a : atoms) fs.atoms.insert(std::move(a));
  return fs;
}

FactSet window_for(std::int64_t frame, std::vector<Atom> atoms) {
  FactSet fs = facts_of(std::move(atoms));
  fs.frame_lo = fs.frame_hi = frame;
  return fs;
}

logic::Program standard_program(const ReasonerParams& p = {}) {
  return logic::parse_program(standard_rules(p));
}

// Ego heading north at a four-way intersection dead ahead.
std::vector<Atom> northbound_scene(std::int64_t f) {
  return {ego_atom(f, "n", 0.0, -20.0), intersection_atom(f, 1, {-8.0, -8.0, 8.0, 8.0})};
}

} // namespace

TEST_CASE("standard rules parse into the expected strata") {
  logic::Program p = standard_program();
  CHECK(p.strata.at("mover_up") == 0);
  CHECK(p.strata.at("mover_left") == 0);
  CHECK(p.strata.at("collective_up") == 1);
  CHECK(p.strata.at("false_negative_light") == 1);
  CHECK(p.strata.at("inferred_green") == 1);
  CHECK(p.strata.at("stopped_in_lane") == 0);
  CHECK(p.strata.at("obstacle_stopper") == 1); // negation over queue membership
  CHECK(p.strata.at("lane_blocked") == 2);     // aggregate over the stoppers
  CHECK(p.max_stratum == 2);
}

TEST_CASE("rule generation honors k and the disable toggles") {
  ReasonerParams p;
  p.k = 3;
  CHECK(standard_light_rules(p).find(">= 3") != std::string::npos);
  p.enable_green_rule = false;
  CHECK(standard_light_rules(p).find("inferred_green") == std::string::npos);
  p.enable_stopped_rule = false;
  CHECK(standard_obstacle_rules(p).find("obstacle_stopper") == std::string::npos);
  CHECK(standard_obstacle_rules(p).find("vacated_lane") != std::string::npos);
  p.enable_vacated_rule = false;
  CHECK(standard_obstacle_rules(p).empty());
  CHECK(standard_rules(p) == standard_light_rules(p));
}

TEST_CASE("shipped rule files match the generated defaults") {
  namespace ts = testsupport;
  std::filesystem::path dir = ts::env_path("CROSSCHECK_RULES");
  CHECK(ts::slurp(dir / "lights.csr") == standard_light_rules());
  CHECK(ts::slurp(dir / "obstacles.csr") == standard_obstacle_rules());
}

TEST_CASE("cross traffic through the forward intersection flags a missed red") {
  std::vector<Atom> atoms = northbound_scene(0);
  atoms.push_back(vehicle_atom(0, 1, "moving", 0.0, -3.0, 0.0));
  atoms.push_back(vehicle_atom(0, 2, "moving", 0.0, 3.0, 0.0));

  std::vector<Verdict> verdicts = run_reasoner(facts_of(atoms), standard_program(), {});
  REQUIRE(verdicts.size() == 1);
  CHECK(verdicts[0].light == Verdict::Light::red);
  CHECK(verdicts[0].light_eligible);
  CHECK_FALSE(verdicts[0].obstacle_eligible);
  CHECK(verdicts[0].fired_rules == std::vector<std::string>{"false_negative_light"});
}

TEST_CASE("one mover is not a collective") {
  std::vector<Atom> atoms = northbound_scene(0);
  atoms.push_back(vehicle_atom(0, 1, "moving", 0.0, -3.0, 0.0));

  std::vector<Verdict> verdicts = run_reasoner(facts_of(atoms), standard_program(), {});
  REQUIRE(verdicts.size() == 1);
  CHECK(verdicts[0].light == Verdict::Light::none);
  CHECK_FALSE(verdicts[0].light_eligible);
  CHECK(verdicts[0].fired_rules.empty());
}

TEST_CASE("parallel traffic infers a green") {
  std::vector<Atom> atoms = northbound_scene(0);
  atoms.push_back(vehicle_atom(0, 1, "moving", 90.0, -3.0, 0.0));
  atoms.push_back(vehicle_atom(0, 2, "moving", 90.0, 3.0, 0.0));

  std::vector<Verdict> verdicts = run_reasoner(facts_of(atoms), standard_program(), {});
  REQUIRE(verdicts.size() == 1);
  CHECK(verdicts[0].light == Verdict::Light::green);
  CHECK(verdicts[0].light_eligible);
}

TEST_CASE("a missed red outranks an inferred green") {
  std::vector<Atom> atoms = northbound_scene(0);
  atoms.push_back(vehicle_atom(0, 1, "moving", 90.0, -5.0, 0.0));
  atoms.push_back(vehicle_atom(0, 2, "moving", 90.0, 5.0, 0.0));
  atoms.push_back(vehicle_atom(0, 3, "moving", 0.0, -1.0, 3.0));
  atoms.push_back(vehicle_atom(0, 4, "moving", 0.0, 1.0, -3.0));

  std::vector<Verdict> verdicts = run_reasoner(facts_of(atoms), standard_program(), {});
  REQUIRE(verdicts.size() == 1);
  CHECK(verdicts[0].light == Verdict::Light::red);
  CHECK(verdicts[0].fired_rules ==
        std::vector<std::string>{"false_negative_light", "inferred_green"});
}

TEST_CASE("no forward intersection means no light verdict") {
  std::vector<Atom> atoms{ego_atom(0, "n", 0.0, -20.0),
                          vehicle_atom(0, 1, "moving", 0.0, -3.0, 0.0),
                          vehicle_atom(0, 2, "moving", 0.0, 3.0, 0.0)};
  std::vector<Verdict> verdicts = run_reasoner(facts_of(atoms), standard_program(), {});
  REQUIRE(verdicts.size() == 1);
  CHECK_FALSE(verdicts[0].light_eligible);

  // Intersection behind the ego is just as invisible.
  atoms.push_back(intersection_atom(0, 1, {-8.0, -48.0, 8.0, -32.0}));
  verdicts = run_reasoner(facts_of(atoms), standard_program(), {});
  CHECK_FALSE(verdicts[0].light_eligible);
}

TEST_CASE("the engine agrees with a naive fixpoint on a firing scene") {
  std::vector<Atom> atoms = northbound_scene(0);
  atoms.push_back(vehicle_atom(0, 1, "moving", 0.0, -3.0, 0.0));
  atoms.push_back(vehicle_atom(0, 2, "moving", 0.0, 3.0, 0.0));
  atoms.push_back(vehicle_atom(0, 3, "stopped", 90.0, 0.0, -14.0));
  atoms.push_back(lane_atom(0, 3, "nb"));

  std::vector<FactSet> augmented = augment_facts({window_for(0, atoms)}, {});
  REQUIRE(augmented.size() == 1);
  logic::Program program = standard_program();
  logic::Model m = logic::evaluate(program, augmented[0]);
  CHECK(testsupport::atom_set(m) ==
        testsupport::atom_set(testsupport::naive_evaluate(program, augmented[0])));

  std::vector<std::vector<Value>> hits = logic::query(m, "false_negative_light", {std::nullopt});
  REQUIRE(hits.size() == 1);
  CHECK(hits[0] == std::vector<Value>{I(0)});
}

TEST_CASE("stopped vehicles queue behind a red or yellow light, chained by gap") {
  std::vector<Atom> atoms{
      intersection_atom(0, 1, {-8.0, -8.0, 8.0, 8.0}),
      light_atom(0, 10, 1, "e", "red"),
      vehicle_atom(0, 1, "stopped", 0.0, -12.0, 0.0), // 1 m behind the stop line
      vehicle_atom(0, 2, "stopped", 0.0, -20.0, 0.0), // 9 m behind it
      vehicle_atom(0, 3, "stopped", 0.0, -28.0, 0.0), // beyond 12 m, chained to 2
      vehicle_atom(0, 4, "stopped", 0.0, -45.0, 0.0), // gap 17 m: unchained
      vehicle_atom(0, 5, "moving", 0.0, -12.0, 3.0),  // moving: never queued
  };
  auto members = [&](const std::string& color) {
    std::vector<Atom> scene = atoms;
    scene[1] = light_atom(0, 10, 1, "e", color);
    std::vector<FactSet> aug = augment_facts({window_for(0, scene)}, {});
    std::set<std::int64_t> got;
    for (const Atom& a : aug[0].atoms)
      if (a.pred == "light_queue_member") got.insert(std::get<std::int64_t>(a.args[1]));
    return got;
  };
  CHECK(members("red") == std::set<std::int64_t>{1, 2, 3});
  CHECK(members("yellow") == std::set<std::int64_t>{1, 2, 3});
  CHECK(members("green").empty());
}

TEST_CASE("queue membership persists while a vehicle stays stopped") {
  Rect box{-8.0, -8.0, 8.0, 8.0};
  std::vector<FactSet> windows{
      window_for(0, {intersection_atom(0, 1, box), light_atom(0, 10, 1, "e", "red"),
                     vehicle_atom(0, 1, "stopped", 0.0, -12.0, 0.0)}),
      window_for(1, {intersection_atom(1, 1, box), light_atom(1, 10, 1, "e", "green"),
                     vehicle_atom(1, 1, "stopped", 0.0, -12.0, 0.0)}),
      window_for(2, {intersection_atom(2, 1, box), light_atom(2, 10, 1, "e", "green"),
                     vehicle_atom(2, 1, "moving", 0.0, -12.0, 0.0)}),
  };
  std::vector<FactSet> aug = augment_facts(windows, {});
  auto queued = [&](std::size_t i) {
    for (const Atom& a : aug[i].atoms)
      if (a.pred == "light_queue_member") return true;
    return false;
  };
  CHECK(queued(0));       // geometric member under the red
  CHECK(queued(1));       // light went green but the vehicle has not moved yet
  CHECK_FALSE(queued(2)); // moving again: the latch releases
}

TEST_CASE("unexplained stopped vehicles ahead of the ego block their lane") {
  std::vector<Atom> atoms{
      ego_atom(0, "e", -30.0, 0.0),
      vehicle_atom(0, 1, "stopped", 0.0, -10.0, 0.0),
      vehicle_atom(0, 2, "stopped", 0.0, -18.0, 0.0),
      lane_atom(0, 1, "eb"),
      lane_atom(0, 2, "eb"),
  };
  std::vector<Verdict> verdicts = run_reasoner(facts_of(atoms), standard_program(), {});
  REQUIRE(verdicts.size() == 1);
  CHECK(verdicts[0].obstacle_eligible);
  CHECK(verdicts[0].obstacle_lanes == std::set<std::string>{"eb"});
  CHECK(verdicts[0].fired_rules == std::vector<std::string>{"lane_blocked"});

  SUBCASE("a red light explaining the queue suppresses the verdict") {
    atoms.push_back(intersection_atom(0, 1, {-4.0, -8.0, 12.0, 8.0}));
    atoms.push_back(light_atom(0, 10, 1, "e", "red"));
    // stop line at x = -7: vehicle 1 is 3 m behind it, vehicle 2 chains
    verdicts = run_reasoner(facts_of(atoms), standard_program(), {});
    CHECK_FALSE(verdicts[0].obstacle_eligible);
  }

  SUBCASE("one stopper is not enough") {
    std::vector<Atom> single{ego_atom(0, "e", -30.0, 0.0),
                             vehicle_atom(0, 1, "stopped", 0.0, -10.0, 0.0), lane_atom(0, 1, "eb")};
    verdicts = run_reasoner(facts_of(single), standard_program(), {});
    CHECK_FALSE(verdicts[0].obstacle_eligible);
  }

  SUBCASE("behind the ego does not count") {
    std::vector<Atom> behind{ego_atom(0, "e", 30.0, 0.0),
                             vehicle_atom(0, 1, "stopped", 0.0, -10.0, 0.0),
                             vehicle_atom(0, 2, "stopped", 0.0, -18.0, 0.0), lane_atom(0, 1, "eb"),
                             lane_atom(0, 2, "eb")};
    verdicts = run_reasoner(facts_of(behind), standard_program(), {});
    CHECK_FALSE(verdicts[0].obstacle_eligible);
  }
}

TEST_CASE("vehicles abandoning a lane mark it blocked for a bounded window") {
  std::vector<FactSet> windows;
  for (std::int64_t f = 0; f < 40; ++f) {
    std::string lane = f == 0 ? "eb" : "nb";
    windows.push_back(window_for(f, {lane_atom(f, 7, lane), lane_atom(f, 8, lane)}));
  }
  ReasonerParams p; // window_frames = 30
  std::vector<FactSet> aug = augment_facts(windows, p);
  auto vacated = [&](std::size_t i) {
    for (const Atom& a : aug[i].atoms)
      if (a.pred == "vacated_lane") return true;
    return false;
  };
  CHECK_FALSE(vacated(0)); // nothing has happened yet at frame 0
  CHECK(vacated(1));       // the switch lands on the frame after the diff
  CHECK(vacated(30));      // still remembered 30 frames in
  CHECK_FALSE(vacated(31));

  std::vector<Verdict> verdicts =
      run_reasoner(facts_of({lane_atom(0, 7, "eb"), lane_atom(0, 8, "eb"), lane_atom(1, 7, "nb"),
                             lane_atom(1, 8, "nb")}),
                   standard_program(), p);
  REQUIRE(verdicts.size() == 2);
  CHECK(verdicts[1].obstacle_lanes == std::set<std::string>{"eb"});
}

TEST_CASE("reasoning from a log and from its extracted facts agree") {
  WorldConfig wc = world_config_from_file(
      (testsupport::env_path("CROSSCHECK_CONFIGS") / "scenario_a.json").string());
  NoiseConfig noise = noise_config_from_file(
      (testsupport::env_path("CROSSCHECK_CONFIGS") / "noise_lights.json").string());
  FrameLog det = corrupt_log(run_scenario(wc), noise);

  logic::Program program = standard_program();
  ReasonerParams p;
  std::vector<Verdict> from_log = run_reasoner(det, program, p, 1);

  FactSet all;
  for (const FrameRecord& rec : det) {
    std::set<Atom> atoms = frame_facts(rec);
    all.atoms.insert(atoms.begin(), atoms.end());
  }
  std::vector<Verdict> from_facts = run_reasoner(all, program, p, 1);

  REQUIRE(from_log.size() == from_facts.size());
  for (std::size_t i = 0; i < from_log.size(); ++i)
    CHECK(verdict_to_jsonl_line(from_log[i]) == verdict_to_jsonl_line(from_facts[i]));
}

TEST_CASE("facts without a leading frame index are rejected") {
  FactSet bad = facts_of({{"p", {Value{"x"}}}});
  CHECK_THROWS_WITH_AS((void)run_reasoner(bad, standard_program(), {}),
                       doctest::Contains("frame index"), ValidationError);
}

TEST_CASE("baseline classification reads the forward light and detected obstacles") {
  FrameRecord f;
  f.frame = 4;
  f.ego.x = 0.0;
  f.ego.y = -20.0;
  f.ego.approach = Compass::n;
  f.intersections.push_back({1, {-8.0, -8.0, 8.0, 8.0}});
  f.lights.push_back({10, 1, Compass::e, LightColor::green});
  f.lights.push_back({11, 1, Compass::n, LightColor::yellow});
  f.obstacles.push_back({1, "eb", {7.0, -1.0, 11.0, 1.0}});

  BaselineClassification b = classify_baseline(f, 40.0);
  CHECK(b.frame == 4);
  CHECK(b.light_color == BaselineClassification::Color::yellow); // the ego-approach light
  CHECK(b.obstacle_lanes == std::set<std::string>{"eb"});

  f.lights.erase(f.lights.begin() + 1);
  CHECK(classify_baseline(f, 40.0).light_color == BaselineClassification::Color::unknown);
  f.intersections.clear();
  CHECK(classify_baseline(f, 40.0).light_color == BaselineClassification::Color::unknown);
}

TEST_CASE("combine overrides on eligible verdicts and passes through otherwise") {
  BaselineClassification b;
  b.frame = 9;
  b.light_color = BaselineClassification::Color::green;
  b.obstacle_lanes = {"eb"};

  Verdict none;
  none.frame = 9;
  CombinedClassification c = combine(b, none);
  CHECK(c.light_color == BaselineClassification::Color::green);
  CHECK(c.obstacle_lanes == std::set<std::string>{"eb"});
  CHECK_FALSE(c.logic_override);

  Verdict red;
  red.frame = 9;
  red.light = Verdict::Light::red;
  red.light_eligible = true;
  red.obstacle_lanes = {"wb"};
  red.obstacle_eligible = true;
  c = combine(b, red);
  CHECK(c.light_color == BaselineClassification::Color::red);
  CHECK(c.obstacle_lanes == std::set<std::string>{"eb", "wb"});
  CHECK(c.logic_override);

  Verdict misaligned;
  misaligned.frame = 8;
  CHECK_THROWS_AS((void)combine(b, misaligned), AlignmentError);
}

TEST_CASE("verdict files round trip and reject inconsistent flags") {
  testsupport::TempDir tmp;
  Verdict a;
  a.frame = 0;
  Verdict b;
  b.frame = 1;
  b.light = Verdict::Light::red;
  b.light_eligible = true;
  b.obstacle_lanes = {"eb", "nb"};
  b.obstacle_eligible = true;
  b.fired_rules = {"false_negative_light", "lane_blocked"};

  std::string path = tmp.file("verdicts.jsonl").string();
  write_verdicts_file(path, {a, b});
  std::vector<Verdict> back = read_verdicts_file(path);
  REQUIRE(back.size() == 2);
  CHECK(verdict_to_jsonl_line(back[0]) == verdict_to_jsonl_line(a));
  CHECK(verdict_to_jsonl_line(back[1]) == verdict_to_jsonl_line(b));

  CHECK_THROWS_AS((void)verdict_from_jsonl_line("{not json", 1), ParseError);
  CHECK_THROWS_WITH_AS(
      (void)verdict_from_jsonl_line(
          R"({"frame":0,"light_verdict":"red","light_eligible":false,"obstacle_lanes":[],)"
          R"("obstacle_eligible":false,"fired_rules":["false_negative_light"]})",
          1),
      doctest::Contains("eligibility"), ParseError);
}

TEST_CASE("an empty road yields ineligible verdicts everywhere") {
  std::vector<Atom> atoms;
  for (std::int64_t f = 0; f < 5; ++f) {
    atoms.push_back(ego_atom(f, "n", 0.0, -20.0));
    atoms.push_back(intersection_atom(f, 1, {-8.0, -8.0, 8.0, 8.0}));
  }
  std::vector<Verdict> verdicts = run_reasoner(facts_of(atoms), standard_program(), {});
  REQUIRE(verdicts.size() == 5);
  for (const Verdict& v : verdicts) {
    CHECK_FALSE(v.light_eligible);
    CHECK_FALSE(v.obstacle_eligible);
    CHECK(v.fired_rules.empty());
  }
}

TEST_CASE("a blocked lane is reported soon after the second vehicle reacts") {
  WorldConfig wc = world_config_from_file(
      (testsupport::env_path("CROSSCHECK_CONFIGS") / "scenario_b.json").string());
  NoiseConfig noise = noise_config_from_file(
      (testsupport::env_path("CROSSCHECK_CONFIGS") / "noise_obstacles.json").string());
  FrameLog gt = run_scenario(wc);
  FrameLog det = corrupt_log(gt, noise);
  std::vector<Verdict> verdicts = run_reasoner(det, standard_program(), {});

  std::int64_t second_reaction = -1;
  for (const FrameRecord& f : gt) {
    int reacted = 0;
    for (const VehicleState& v : f.vehicles)
      if (v.action == VehicleAction::stopped || v.lane_id != "eb_main") ++reacted;
    if (reacted >= 2) {
      second_reaction = f.frame;
      break;
    }
  }
  REQUIRE(second_reaction >= 0);

  std::int64_t first_blocked = -1;
  for (const Verdict& v : verdicts) {
    if (v.obstacle_lanes.count("eb_main")) {
      first_blocked = v.frame;
      break;
    }
  }
  REQUIRE(first_blocked >= 0);
  CHECK(first_blocked <= second_reaction + 30);
}
