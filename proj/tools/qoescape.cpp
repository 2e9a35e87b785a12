// qoescape command-line tool.
//
// Exit status: 0 success, 1 failed validation, 2 usage or input errors.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <qoescape/qoescape.hpp>

namespace fs = std::filesystem;
using namespace qoescape;

namespace {

constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write '" + path + "'");
  return out;
}

void print(const Json& j) { std::cout << j.dump(2) << '\n'; }

/// Edge list -> connected topology; falls back to the largest component.
Topology load_connected(const std::string& path) {
  auto loaded = load_edge_list(read_file(path));
  if (is_connected(loaded.graph)) return std::move(loaded.graph);
  auto lcc = largest_component(loaded.graph);
  std::cerr << "warning: input is disconnected; using largest component (N=" << lcc.node_count()
            << ")\n";
  return lcc;
}

struct Inputs {
  std::string path;
  unsigned threads = 0;
};

CostHistogram load_histogram(const Inputs& in) { return hop_histogram(load_connected(in.path), in.threads); }

// ---------------------------------------------------------------------------

struct GenOptions {
  std::string type;
  std::size_t n = 0, rows = 0, cols = 0, m = 0, k = 0;
  double p = 0, beta = 0;
  std::uint64_t seed = 0;
  std::string out;
};

TopologySpec make_spec(const GenOptions& o) {
  TopologySpec s;
  s.seed = o.seed;
  if (o.type == "complete") s.kind = spec::Complete{o.n};
  else if (o.type == "path") s.kind = spec::Path{o.n};
  else if (o.type == "star") s.kind = spec::Star{o.n};
  else if (o.type == "grid") s.kind = spec::Grid{o.rows, o.cols};
  else if (o.type == "er") s.kind = spec::ErdosRenyi{o.n, o.p};
  else if (o.type == "ba") s.kind = spec::BarabasiAlbert{o.n, o.m};
  else if (o.type == "ws") s.kind = spec::WattsStrogatz{o.n, o.k, o.beta};
  else throw UsageError("unknown topology type '" + o.type + "'");
  return s;
}

Json gen_config(const GenOptions& o) {
  return {{"type", o.type}, {"n", o.n}, {"rows", o.rows}, {"cols", o.cols}, {"p", o.p},
          {"m", o.m},       {"k", o.k}, {"beta", o.beta}, {"seed", o.seed}, {"out", o.out}};
}

struct WindowOptions {
  double a_min = 0.05, a_max = 20.0;
  std::size_t a_steps = 64;
  std::string a_spacing = "log";
  std::optional<double> h0_min, h0_max;
  std::size_t h0_steps = 256;

  GridSpec resolve(double max_cost) const {
    if (a_spacing != "log" && a_spacing != "linear") throw UsageError("--a-spacing must be log or linear");
    GridSpec s = default_grid_spec(max_cost);
    s.a_axis = {a_min, a_max, a_steps, a_spacing == "log" ? Spacing::log : Spacing::linear};
    s.h0_axis = {h0_min.value_or(s.h0_axis.min), h0_max.value_or(s.h0_axis.max), h0_steps, Spacing::linear};
    s.validate();
    return s;
  }
};

void add_window_flags(CLI::App* cmd, WindowOptions& w) {
  cmd->add_option("--a-min", w.a_min, "Smallest strictness a")->capture_default_str();
  cmd->add_option("--a-max", w.a_max, "Largest strictness a")->capture_default_str();
  cmd->add_option("--a-steps", w.a_steps, "Points on the a axis")->capture_default_str();
  cmd->add_option("--a-spacing", w.a_spacing, "log or linear")->capture_default_str();
  cmd->add_option("--h0-min", w.h0_min, "Smallest threshold (default 0.5)");
  cmd->add_option("--h0-max", w.h0_max, "Largest threshold (default max cost + 0.5)");
  cmd->add_option("--h0-steps", w.h0_steps, "Points on the h0 axis")->capture_default_str();
}

Scaling parse_scaling(const std::string& s) {
  if (s == "minmax") return Scaling::minmax;
  if (s == "absmax") return Scaling::absmax;
  throw UsageError("--scaling must be minmax or absmax");
}

Parameter parse_param(const std::string& s) {
  if (s == "a") return Parameter::a;
  if (s == "h0") return Parameter::h0;
  throw UsageError("--param must be a or h0");
}

void write_heatmaps(const ScanGrid& g, const std::string& dir, const std::vector<std::string>& layers,
                    Scaling scaling) {
  fs::create_directories(dir);
  for (std::size_t l = 0; l < kLayerCount; ++l) {
    const std::string name(kLayerNames[l]);
    if (!layers.empty() && std::find(layers.begin(), layers.end(), name) == layers.end()) continue;
    const auto img = render_heatmap(g.layers[l], scaling);
    auto pgm = open_out((fs::path(dir) / (name + ".pgm")).string());
    write_pgm(pgm, img);
    auto side = open_out((fs::path(dir) / (name + ".json")).string());
    side << pgm_sidecar(img, g.spec, name).dump(2) << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fairness-sensitivity landscape of network topologies"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  // gen
  GenOptions gen;
  auto* c_gen = app.add_subcommand("gen", "Generate a topology as an edge list");
  c_gen->add_option("--type", gen.type, "complete|path|star|grid|er|ba|ws")->required();
  c_gen->add_option("--n", gen.n, "Node count");
  c_gen->add_option("--rows", gen.rows, "Grid rows");
  c_gen->add_option("--cols", gen.cols, "Grid columns");
  c_gen->add_option("--p", gen.p, "Edge probability (er)");
  c_gen->add_option("--m", gen.m, "Edges per new node (ba)");
  c_gen->add_option("--k", gen.k, "Ring degree (ws)");
  c_gen->add_option("--beta", gen.beta, "Rewiring probability (ws)");
  c_gen->add_option("--seed", gen.seed, "PRNG seed")->capture_default_str();
  c_gen->add_option("--out", gen.out, "Output edge list")->required();

  // ingest-caida
  std::string caida_in, caida_out;
  std::size_t caida_core = 0;
  bool caida_lcc = false;
  auto* c_ingest = app.add_subcommand("ingest-caida", "Convert a CAIDA as-rel file to an edge list");
  c_ingest->add_option("--in", caida_in, "CAIDA '|' file")->required();
  c_ingest->add_option("--out", caida_out, "Output edge list")->required();
  c_ingest->add_flag("--lcc", caida_lcc, "Keep the largest connected component");
  c_ingest->add_option("--kcore", caida_core, "Reduce to the k-core (after --lcc)");

  Inputs in;
  auto add_input = [&](CLI::App* cmd) {
    cmd->add_option("--in", in.path, "Edge list")->required();
    cmd->add_option("--threads", in.threads, "Worker threads (0 = all cores)")->capture_default_str();
  };

  auto* c_hist = app.add_subcommand("hist", "All-pairs hop histogram and moments");
  add_input(c_hist);

  double a = 0, h0 = 0;
  auto add_sla = [&](CLI::App* cmd) {
    cmd->add_option("--a", a, "Strictness a > 0")->required();
    cmd->add_option("--h0", h0, "Threshold h0 > 0")->required();
  };

  auto* c_eval = app.add_subcommand("eval", "Weights, shares, s_bar and imbalance at one SLA point");
  add_input(c_eval);
  add_sla(c_eval);

  std::optional<double> step;
  auto* c_grad = app.add_subcommand("grad", "Gradient, trade-off angle and Hessian at one SLA point");
  add_input(c_grad);
  add_sla(c_grad);
  c_grad->add_option("--step", step, "Hessian FD step (default per-axis max(1e-4, 1e-4|theta|))");

  std::string param = "h0";
  auto* c_diag = app.add_subcommand("diagnose", "Per-class split of one gradient component");
  add_input(c_diag);
  add_sla(c_diag);
  c_diag->add_option("--param", param, "a or h0")->capture_default_str();

  WindowOptions window;
  std::string csv_path, pgm_dir, scaling = "minmax";
  std::vector<std::string> layers;
  auto* c_scan = app.add_subcommand("scan", "Grid scan over (a, h0)");
  add_input(c_scan);
  add_window_flags(c_scan, window);
  c_scan->add_option("--csv", csv_path, "Grid CSV output")->required();
  c_scan->add_option("--pgm-dir", pgm_dir, "Directory for PGM heatmaps and sidecars");
  c_scan->add_option("--layers", layers, "Layers to render (default all)");
  c_scan->add_option("--scaling", scaling, "minmax or absmax")->capture_default_str();

  double i_max = 0, s_min = 0;
  double percentile = 90;
  auto* c_region = app.add_subcommand("region", "Operating region, AoR and MCR from a grid CSV");
  c_region->add_option("--csv", csv_path, "Grid CSV from scan")->required();
  c_region->add_option("--i-max", i_max, "Imbalance ceiling")->required();
  c_region->add_option("--s-min", s_min, "Satisfaction floor")->required();
  c_region->add_option("--percentile", percentile, "Ridge percentile")->capture_default_str();

  std::string mode, cx_out;
  double large_a = 10;
  std::size_t samples = 200, trials = 1000;
  std::uint64_t seed = 1;
  auto* c_val = app.add_subcommand("validate", "Check asymptotic laws, gradient or axioms");
  c_val->add_option("--mode", mode, "small-a|large-a|gradient|axioms")->required();
  c_val->add_option("--in", in.path, "Edge list (not used by axioms)");
  c_val->add_option("--threads", in.threads, "Worker threads")->capture_default_str();
  c_val->add_option("--a", large_a, "Strictness for large-a")->capture_default_str();
  c_val->add_option("--samples", samples, "Random SLA points (gradient)")->capture_default_str();
  c_val->add_option("--trials", trials, "Random share vectors (axioms)")->capture_default_str();
  c_val->add_option("--seed", seed, "PRNG seed")->capture_default_str();
  c_val->add_option("--counterexamples-out", cx_out, "Write index counterexamples (axioms)");

  std::vector<std::string> cmp_in, cmp_names;
  std::string json_out;
  auto* c_cmp = app.add_subcommand("compare", "AoR and MCR for several topologies on one window");
  c_cmp->add_option("--in", cmp_in, "Edge lists (two or more)")->required();
  c_cmp->add_option("--name", cmp_names, "Row names (default file stem)");
  c_cmp->add_option("--i-max", i_max, "Imbalance ceiling")->required();
  c_cmp->add_option("--s-min", s_min, "Satisfaction floor")->required();
  c_cmp->add_option("--threads", in.threads, "Worker threads")->capture_default_str();
  c_cmp->add_option("--json", json_out, "Also write the rows as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*c_gen) {
      const auto g = generate(make_spec(gen));
      auto out = open_out(gen.out);
      write_edge_list(out, g);
      Json doc = document("gen", gen_config(gen));
      doc["N"] = g.node_count();
      doc["E"] = g.edge_count();
      print(doc);
    } else if (*c_ingest) {
      const auto loaded = load_caida(read_file(caida_in));
      Topology g = loaded.graph;
      if (caida_lcc) g = largest_component(g);
      if (caida_core > 0) {
        auto core = k_core(g, caida_core);
        if (!core) throw UsageError("the " + std::to_string(caida_core) + "-core is empty");
        g = std::move(*core);
      }
      auto out = open_out(caida_out);
      write_edge_list(out, g);
      Json doc = document("ingest-caida", {{"in", caida_in}, {"out", caida_out}, {"lcc", caida_lcc}, {"kcore", caida_core}});
      doc["raw_nodes"] = loaded.graph.node_count();
      doc["raw_edges"] = loaded.graph.edge_count();
      doc["duplicate_edges"] = loaded.duplicate_edges;
      doc["self_loops"] = loaded.self_loops;
      doc["N"] = g.node_count();
      doc["E"] = g.edge_count();
      print(doc);
    } else if (*c_hist) {
      Json doc = document("hist", {{"in", in.path}, {"threads", in.threads}});
      doc["histogram"] = to_json(load_histogram(in));
      print(doc);
    } else if (*c_eval) {
      const auto h = load_histogram(in);
      Json doc = document("eval", {{"in", in.path}, {"a", a}, {"h0", h0}});
      const auto snap = evaluate(h, SlaPoint(a, h0));
      doc.update(to_json(snap));
      print(doc);
    } else if (*c_grad) {
      const auto h = load_histogram(in);
      const SlaPoint sla(a, h0);
      Json doc = document("grad", {{"in", in.path}, {"a", a}, {"h0", h0}, {"step", step ? Json(*step) : Json(nullptr)}});
      doc["gradient"] = to_json(gradient(h, sla));
      doc["hessian"] = to_json(step ? hessian(h, sla, *step) : hessian(h, sla));
      print(doc);
    } else if (*c_diag) {
      const auto h = load_histogram(in);
      Json doc = document("diagnose", {{"in", in.path}, {"a", a}, {"h0", h0}, {"param", param}});
      const auto rows = diagnose(h, SlaPoint(a, h0), parse_param(param));
      double sum = 0;
      for (const auto& r : rows) sum += r.contribution;
      doc["rows"] = to_json(rows);
      doc["sum"] = num(sum);
      print(doc);
    } else if (*c_scan) {
      const auto h = load_histogram(in);
      const auto spec = window.resolve(h.max_cost());
      const auto scaled = parse_scaling(scaling);
      const auto g = scan(h, spec, in.threads);
      auto out = open_out(csv_path);
      write_grid_csv(out, g);
      if (!pgm_dir.empty()) write_heatmaps(g, pgm_dir, layers, scaled);
      Json doc = document("scan", {{"in", in.path}, {"window", to_json(spec)}, {"csv", csv_path},
                                   {"pgm_dir", pgm_dir}, {"scaling", scaling}, {"threads", in.threads}});
      doc["cells"] = g.a_values.size() * g.h0_values.size();
      print(doc);
    } else if (*c_region) {
      std::ifstream csv(csv_path, std::ios::binary);
      if (!csv) throw UsageError("cannot open '" + csv_path + "'");
      const auto g = read_grid_csv(csv);
      const auto region = operating_region(g, i_max, s_min);
      const auto ridges = detect_ridges(g, percentile);
      std::size_t ridge_cells = 0, belt_cells = 0;
      for (auto v : ridges.ridge.flat()) ridge_cells += v;
      for (auto v : ridges.belt.flat()) belt_cells += v;
      Json doc = document("region", {{"csv", csv_path}, {"i_max", i_max}, {"s_min", s_min}, {"percentile", percentile}});
      doc.update(to_json(region, g.spec));
      doc["ridge_cells"] = ridge_cells;
      doc["belt_cells"] = belt_cells;
      print(doc);
    } else if (*c_val) {
      Json config = {{"mode", mode}, {"in", in.path}, {"a", large_a}, {"samples", samples}, {"trials", trials}, {"seed", seed}};
      ValidationReport report;
      if (mode == "axioms") {
        report = validate_axioms(trials, seed);
        Json found = Json::array();
        bool all_found = true;
        for (auto [idx, axiom] : counterexample_cells()) {
          const auto cx = find_counterexample(idx, axiom, seed);
          all_found = all_found && cx.has_value();
          if (cx) found.push_back(to_json(*cx));
        }
        report.checks.push_back({"counterexamples found", static_cast<double>(found.size()),
                                 static_cast<double>(counterexample_cells().size()), "==", all_found});
        report.details["counterexamples"] = found;
        if (!cx_out.empty()) open_out(cx_out) << found.dump(2) << '\n';
      } else {
        if (in.path.empty()) throw UsageError("--in is required for mode " + mode);
        const auto h = load_histogram(in);
        if (mode == "small-a") report = validate_small_a(h);
        else if (mode == "large-a") report = validate_large_a(h, large_a);
        else if (mode == "gradient") report = validate_gradient(h, samples, seed);
        else throw UsageError("unknown mode '" + mode + "'");
      }
      Json doc = document("validate", config);
      doc.update(to_json(report));
      print(doc);
      return report.pass() ? 0 : kExitFail;
    } else if (*c_cmp) {
      if (cmp_in.size() < 2) throw UsageError("compare needs at least 2 --in files");
      if (!cmp_names.empty() && cmp_names.size() != cmp_in.size()) {
        throw UsageError("--name must be given once per --in");
      }
      std::vector<NamedHistogram> inputs;
      for (std::size_t i = 0; i < cmp_in.size(); ++i) {
        const std::string name = cmp_names.empty() ? fs::path(cmp_in[i]).stem().string() : cmp_names[i];
        try {
          const auto g = load_connected(cmp_in[i]);
          inputs.push_back({name, g.node_count(), hop_histogram(g, in.threads)});
        } catch (const Error& e) {
          throw Error(name + ": " + e.what());
        }
      }
      const auto spec = comparison_window(inputs);
      const auto rows = compare(inputs, i_max, s_min, spec, in.threads);
      std::cout << comparison_table(rows);
      if (!json_out.empty()) {
        Json doc = document("compare", {{"in", cmp_in}, {"i_max", i_max}, {"s_min", s_min}, {"window", to_json(spec)}});
        doc["rows"] = to_json(rows);
        open_out(json_out) << doc.dump(2) << '\n';
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return 0;
}
