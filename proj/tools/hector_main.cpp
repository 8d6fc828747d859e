#include <atomic>
#include <charconv>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "hector/control_server.hpp"
#include "hector/controller.hpp"
#include "hector/evaluation.hpp"
#include "hector/osr.hpp"
#include "hector/pipeline.hpp"
#include "hector/session_store.hpp"
#include "hector/synth.hpp"

namespace fs = std::filesystem;
using namespace hector;
using namespace std::chrono_literals;

namespace {

std::atomic<bool> g_interrupted{false};

void on_signal(int) { g_interrupted.store(true); }

fs::path data_dir() {
  if (const char* env = std::getenv("HECTOR_DATA_DIR"); env && *env) return env;
  return "hector-data";
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

double percentile(std::vector<double> xs, double q) {
  if (xs.empty()) return 0.0;
  std::sort(xs.begin(), xs.end());
  const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(xs.size())));
  return xs[std::min(xs.size() - 1, rank == 0 ? 0 : rank - 1)];
}

struct RunArgs {
  std::string source;
  std::string config;
  std::string model = "stub:1";
  std::string listen;
  std::string events;
  std::string session_id;
};

int cmd_run(const RunArgs& args) {
  PipelineConfig config = args.config.empty() ? PipelineConfig{} : load_config_file(args.config);
  if (auto problems = validate_config(config); !problems.empty()) {
    for (const auto& p : problems) std::cerr << "invalid config: " << p << "\n";
    return 2;
  }
  SessionController controller({data_dir(), args.model});
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);

  if (!args.listen.empty()) {
    const auto control = net::parse_endpoint(args.listen);
    net::Endpoint events = control;
    if (!args.events.empty()) {
      events = net::parse_endpoint(args.events);
    } else if (control.port != 0) {
      events.port = static_cast<std::uint16_t>(control.port + 1);
    }
    ControlServer server(controller, {args.source, config, args.model}, control, events);
    std::cout << "control " << control.host << ":" << server.control_port() << "\n"
              << "events " << events.host << ":" << server.event_port() << std::endl;
    while (!g_interrupted.load()) std::this_thread::sleep_for(100ms);
    server.stop();
    if (controller.state() == LifecycleState::Running) controller.stop();
    return 0;
  }

  if (args.source.empty()) {
    std::cerr << "--source is required without --listen\n";
    return 2;
  }
  StartRequest request{args.source, config, args.model, std::nullopt};
  if (!args.session_id.empty()) request.session_id = args.session_id;
  try {
    controller.start(request);
  } catch (const ControlError& e) {
    std::cerr << e.code() << ": " << e.what() << "\n";
    return 1;
  }
  ReviewBundle bundle;
  for (;;) {
    if (controller.wait_for_review(100ms)) {
      bundle = controller.review_get();
      break;
    }
    if (g_interrupted.load()) {
      bundle = controller.stop();
      break;
    }
  }
  std::cout << bundle_to_json(bundle).dump(2) << "\n";
  if (auto stats = controller.last_stats()) {
    const double fps = stats->elapsed_s > 0 ? static_cast<double>(stats->frames) / stats->elapsed_s : 0;
    std::cerr << std::fixed << std::setprecision(2) << "frames " << stats->frames << " dropped "
              << stats->dropped << " fps " << fps << " p99_ms " << percentile(stats->latencies_ms, 0.99)
              << "\n";
  }
  controller.submit_review({}, {});
  return 0;
}

/// Ground truth is only known for synthetic sessions.
std::optional<SynthStream> stream_for(const SessionRecord& s) {
  const std::string prefix = "synth:";
  if (s.source.rfind(prefix, 0) != 0) return std::nullopt;
  return SynthStream(parse_synth_spec(s.source.substr(prefix.size())));
}

int cmd_eval(const fs::path& sessions_dir, const std::string& out) {
  const auto sessions = load_sessions(sessions_dir);
  ConfusionMatrix vs_truth;
  ConfusionMatrix vs_clinician;
  std::vector<VideoScores> videos;
  std::vector<double> pooled_scores;
  std::vector<bool> pooled_labels;

  for (const auto& s : sessions) {
    for (const auto& sel : s.selection) {
      if (const auto* e = s.edit_for(sel.frame_index)) vs_clinician.add(e->corrected_mes, sel.mes);
    }
    auto stream = stream_for(s);
    if (!stream) continue;
    VideoScores video{s.session_id, {}, {}};
    for (const auto& v : s.verdicts) {
      const auto i = static_cast<std::size_t>(v.frame_index());
      if (i >= stream->usable().size()) continue;
      video.scores.push_back(usability_score(v));
      video.labels.push_back(stream->usable()[i]);
      if (v.is_scored() && stream->true_mes()[i]) {
        vs_truth.add(MesScore(*stream->true_mes()[i]), v.scored().mes);
      }
    }
    pooled_scores.insert(pooled_scores.end(), video.scores.begin(), video.scores.end());
    pooled_labels.insert(pooled_labels.end(), video.labels.begin(), video.labels.end());
    videos.push_back(std::move(video));
  }

  std::cout << "sessions " << sessions.size() << "\n" << std::fixed << std::setprecision(4);
  auto report = [](const char* name, const ConfusionMatrix& cm) {
    if (cm.total() == 0) {
      std::cout << name << ": no frames\n";
      return;
    }
    std::cout << name << ": n " << cm.total() << " accuracy " << accuracy(cm) << " kappa "
              << cohen_kappa(cm) << "\n";
  };
  report("model vs synthetic truth", vs_truth);
  report("model vs clinician", vs_clinician);

  std::vector<VideoScores> gradable;
  for (const auto& v : videos) {
    const auto usable = std::count(v.labels.begin(), v.labels.end(), true);
    if (usable > 0 && usable < static_cast<std::ptrdiff_t>(v.labels.size())) {
      gradable.push_back(v);
    } else {
      std::cout << v.video_id << ": single-class labels, skipped\n";
    }
  }
  if (gradable.empty()) return 0;
  const auto macro = macro_auroc(gradable);
  std::cout << std::left << std::setw(28) << "video" << "auroc\n";
  for (const auto& [id, a] : macro.per_video) std::cout << std::setw(28) << id << a << "\n";
  std::cout << std::setw(28) << "macro" << macro.macro << "\n";

  if (!out.empty()) {
    fs::create_directories(out);
    write_text(fs::path(out) / "auroc.csv", auroc_csv(macro));
    write_text(fs::path(out) / "roc.csv", roc_csv(roc_sweep(pooled_scores, pooled_labels)));
  }
  return 0;
}

int cmd_export(const fs::path& sessions_dir, const fs::path& out) {
  const auto sessions = load_sessions(sessions_dir);
  const auto rows = export_dataset(sessions, sessions_dir, out);
  std::cout << "exported " << rows.size() << " frames from " << sessions.size() << " sessions to "
            << out.string() << "\n";
  return 0;
}

std::vector<LabeledLogits> read_validation(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::vector<LabeledLogits> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> fields;
    std::stringstream ss(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(ss, cell, ',')) {
      double x = 0;
      auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), x);
      if (ec != std::errc() || p != cell.data() + cell.size()) numeric = false;
      fields.push_back(x);
    }
    if (!numeric && line_no == 1) continue;  // header
    if (!numeric || fields.size() != kNumClasses + 1) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": expected 4 logits and a label");
    }
    std::array<double, kNumClasses> z{};
    std::copy_n(fields.begin(), kNumClasses, z.begin());
    rows.emplace_back(LogitVector(z), MesScore(static_cast<int>(fields.back())));
  }
  return rows;
}

int cmd_calibrate(const fs::path& validation, const fs::path& out) {
  const auto rows = read_validation(validation);
  const auto model = fit_temperature(rows);
  std::ostringstream text;
  text << "temperature = " << std::setprecision(17) << model.temperature() << "\n";
  write_text(out, text.str());
  std::cout << std::setprecision(6) << "n " << rows.size() << " temperature " << model.temperature()
            << " nll " << mean_nll(rows, 1.0) << " -> " << mean_nll(rows, model.temperature())
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hector: endoscopic video MES scoring engine"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "score a video source, headless or behind the control socket");
  run_cmd->add_option("--source", run.source, "video file, image directory or synth:SPEC");
  run_cmd->add_option("--config", run.config, "pipeline config file");
  run_cmd->add_option("--model", run.model, "stub:SEED or remote:HOST:PORT");
  run_cmd->add_option("--listen", run.listen, "control socket address HOST:PORT");
  run_cmd->add_option("--events", run.events, "event socket address (default: control port + 1)");
  run_cmd->add_option("--session-id", run.session_id, "session id for a headless run");

  std::string sessions;
  std::string out;
  auto* eval_cmd = app.add_subcommand("eval", "report metrics over stored sessions");
  eval_cmd->add_option("--sessions", sessions, "session directory (default: $HECTOR_DATA_DIR)");
  eval_cmd->add_option("--out", out, "directory for auroc.csv and roc.csv");

  auto* export_cmd = app.add_subcommand("export", "export reviewed frames as a labelled dataset");
  export_cmd->add_option("--sessions", sessions, "session directory (default: $HECTOR_DATA_DIR)");
  export_cmd->add_option("--out", out, "output directory")->required();

  std::string validation;
  auto* calibrate_cmd = app.add_subcommand("calibrate", "fit the softmax temperature");
  calibrate_cmd->add_option("--validation", validation, "CSV rows l0,l1,l2,l3,label")->required();
  calibrate_cmd->add_option("--out", out, "output config fragment")->required();

  CLI11_PARSE(app, argc, argv);
  const fs::path session_dir = sessions.empty() ? data_dir() : fs::path(sessions);
  try {
    if (*run_cmd) return cmd_run(run);
    if (*eval_cmd) return cmd_eval(session_dir, out);
    if (*export_cmd) return cmd_export(session_dir, out);
    if (*calibrate_cmd) return cmd_calibrate(validation, out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
