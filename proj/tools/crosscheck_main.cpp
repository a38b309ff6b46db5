#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "crosscheck/errors.hpp"
#include "crosscheck/facts.hpp"
#include "crosscheck/frame.hpp"
#include "crosscheck/fusion.hpp"
#include "crosscheck/logic/parser.hpp"
#include "crosscheck/noise.hpp"
#include "crosscheck/scoring.hpp"
#include "crosscheck/simulator.hpp"
#include "crosscheck/world_config.hpp"

namespace cc = crosscheck;

namespace {

struct ReasonFlags {
  std::vector<std::string> rules_files;
  cc::ReasonerParams params;
  std::int64_t window = 1;
  bool disable_green = false;
  bool disable_stopped = false;
  bool disable_vacated = false;

  cc::ReasonerParams resolved() const {
    cc::ReasonerParams p = params;
    p.enable_green_rule = !disable_green;
    p.enable_stopped_rule = !disable_stopped;
    p.enable_vacated_rule = !disable_vacated;
    return p;
  }
};

// --k and the --disable-* toggles shape the generated rules, so they clash
// with --rules; --margin-m / --lookahead-m / --window tune fact extraction
// and stay valid either way.
void add_reason_flags(CLI::App* cmd, ReasonFlags& rf, bool with_window) {
  CLI::Option* rules = cmd->add_option("--rules", rf.rules_files,
                                       "Rule file(s) replacing the shipped rules (repeatable)");
  CLI::Option* k = cmd->add_option("--k", rf.params.k, "Vehicles needed for a collective");
  cmd->add_option("--margin-m", rf.params.margin_m, "Intersection region margin in meters");
  cmd->add_option("--lookahead-m", rf.params.lookahead_m, "Forward intersection search in meters");
  CLI::Option* green =
      cmd->add_flag("--disable-green-rule", rf.disable_green, "Drop the inferred_green rules");
  CLI::Option* stopped = cmd->add_flag("--disable-stopped-rule", rf.disable_stopped,
                                       "Drop the stopped-vehicle lane_blocked rule");
  CLI::Option* vacated = cmd->add_flag("--disable-vacated-rule", rf.disable_vacated,
                                       "Drop the lane-vacating lane_blocked rule");
  rules->excludes(k, green, stopped, vacated);
  if (with_window)
    cmd->add_option("--window", rf.window, "Fact window in frames")->check(CLI::PositiveNumber);
}

cc::logic::Program load_program(const ReasonFlags& rf) {
  if (rf.rules_files.empty()) return cc::logic::parse_program(cc::standard_rules(rf.resolved()));
  std::string text;
  for (const std::string& path : rf.rules_files) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw cc::ParseError("cannot open rules file '" + path + "'");
    std::ostringstream ss;
    ss << is.rdbuf();
    text += ss.str();
    text += '\n';
  }
  return cc::logic::parse_program(text);
}

std::set<cc::Atom> all_frame_facts(const cc::FrameLog& log) {
  std::set<cc::Atom> atoms;
  for (const cc::FrameRecord& rec : log) {
    std::set<cc::Atom> facts = cc::frame_facts(rec);
    atoms.insert(facts.begin(), facts.end());
  }
  return atoms;
}

std::string output_stem(const std::string& out) {
  std::size_t slash = out.find_last_of('/');
  std::size_t dot = out.find_last_of('.');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return out;
  return out.substr(0, dot);
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulation, detector corruption and rule-based consistency checking"};
  app.require_subcommand(1);

  std::string config_path, noise_path, in_path, gt_path, det_path, facts_path, verdicts_path;
  std::string out_path, csv_path;
  std::uint64_t seed = 0;
  ReasonFlags reason_flags;
  double eval_lookahead = 40.0;

  CLI::App* simulate = app.add_subcommand("simulate", "Run a scenario and write the ground-truth log");
  simulate->add_option("--config", config_path, "World config JSON")->required();
  CLI::Option* sim_seed = simulate->add_option("--seed", seed, "Override the config seed");
  simulate->add_option("--out", out_path, "Output JSONL log")->required();

  CLI::App* corrupt = app.add_subcommand("corrupt", "Corrupt a ground-truth log into detections");
  corrupt->add_option("--in", in_path, "Ground-truth JSONL log")->required();
  corrupt->add_option("--noise", noise_path, "Noise config JSON")->required();
  CLI::Option* cor_seed = corrupt->add_option("--seed", seed, "Override the noise seed");
  corrupt->add_option("--out", out_path, "Output JSONL log")->required();

  CLI::App* extract = app.add_subcommand("extract", "Transcribe a log into facts");
  extract->add_option("--in", in_path, "JSONL log")->required();
  extract->add_option("--out", out_path, "Output fact file")->required();

  CLI::App* reason = app.add_subcommand("reason", "Evaluate rules over extracted facts");
  reason->add_option("--facts", facts_path, "Fact file from the extract stage")->required();
  add_reason_flags(reason, reason_flags, true);
  reason->add_option("--out", out_path, "Output verdicts JSONL")->required();

  CLI::App* evaluate = app.add_subcommand("evaluate", "Score logic, baseline and combined models");
  evaluate->add_option("--gt", gt_path, "Ground-truth JSONL log")->required();
  evaluate->add_option("--det", det_path, "Detection JSONL log")->required();
  evaluate->add_option("--verdicts", verdicts_path, "Verdicts JSONL")->required();
  evaluate->add_option("--lookahead-m", eval_lookahead, "Forward intersection search in meters");
  evaluate->add_option("--out", out_path, "Report JSON path")->required();
  evaluate->add_option("--csv", csv_path, "Also write the report as CSV");

  CLI::App* pipeline = app.add_subcommand("pipeline", "simulate + corrupt + extract + reason + evaluate");
  pipeline->add_option("--config", config_path, "World config JSON")->required();
  pipeline->add_option("--noise", noise_path, "Noise config JSON")->required();
  CLI::Option* pipe_seed =
      pipeline->add_option("--seed", seed, "Override both the world and noise seeds");
  add_reason_flags(pipeline, reason_flags, true);
  pipeline->add_option("--out", out_path, "Report JSON path")->required();
  pipeline->add_option("--csv", csv_path, "Also write the report as CSV");

  simulate->callback([&] {
    cc::WorldConfig cfg = cc::world_config_from_file(config_path);
    if (sim_seed->count() > 0) cfg.seed = seed;
    cc::write_log_file(out_path, cc::run_scenario(cfg));
  });

  corrupt->callback([&] {
    cc::FrameLog log = cc::read_log_file(in_path);
    cc::NoiseConfig noise = cc::noise_config_from_file(noise_path);
    if (cor_seed->count() > 0) noise.seed = seed;
    cc::write_log_file(out_path, cc::corrupt_log(log, noise));
  });

  extract->callback([&] {
    cc::FrameLog log = cc::read_log_file(in_path);
    cc::write_facts_file(out_path, all_frame_facts(log));
  });

  reason->callback([&] {
    cc::FactSet facts;
    facts.atoms = cc::read_facts_file(facts_path);
    cc::logic::Program program = load_program(reason_flags);
    cc::write_verdicts_file(
        out_path, cc::run_reasoner(facts, program, reason_flags.resolved(), reason_flags.window));
  });

  evaluate->callback([&] {
    cc::FrameLog gt = cc::read_log_file(gt_path);
    cc::FrameLog det = cc::read_log_file(det_path);
    std::vector<cc::Verdict> verdicts = cc::read_verdicts_file(verdicts_path);
    cc::ReasonerParams params;
    params.lookahead_m = eval_lookahead;
    cc::MetricsReport report = cc::score_all(gt, det, verdicts, params);
    cc::write_report_json_file(out_path, report);
    if (!csv_path.empty()) cc::write_report_csv_file(csv_path, report);
  });

  pipeline->callback([&] {
    cc::WorldConfig cfg = cc::world_config_from_file(config_path);
    cc::NoiseConfig noise = cc::noise_config_from_file(noise_path);
    if (pipe_seed->count() > 0) {
      cfg.seed = seed;
      noise.seed = seed;
    }
    std::string stem = output_stem(out_path);
    cc::FrameLog gt = cc::run_scenario(cfg);
    cc::write_log_file(stem + "_gt.jsonl", gt);
    cc::FrameLog det = cc::corrupt_log(gt, noise);
    cc::write_log_file(stem + "_det.jsonl", det);
    cc::write_facts_file(stem + "_facts.txt", all_frame_facts(det));
    cc::FactSet facts;
    facts.atoms = cc::read_facts_file(stem + "_facts.txt");
    cc::logic::Program program = load_program(reason_flags);
    cc::ReasonerParams params = reason_flags.resolved();
    std::vector<cc::Verdict> verdicts =
        cc::run_reasoner(facts, program, params, reason_flags.window);
    cc::write_verdicts_file(stem + "_verdicts.jsonl", verdicts);
    cc::MetricsReport report = cc::score_all(gt, det, verdicts, params);
    cc::write_report_json_file(out_path, report);
    if (!csv_path.empty()) cc::write_report_csv_file(csv_path, report);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  } catch (const cc::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(e.exit_code());
  }
  return 0;
}
