#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "harqerr_cli/cli.hpp"

namespace harqerr::cli {

namespace {

std::string flag_name(const std::string& key) {
  std::string s = key;
  for (char& c : s)
    if (c == '_') c = '-';
  return "--" + s;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f << text;
  f.flush();
  if (!f) throw IoError("write failed for " + path.string());
}

const char* type_name(ParamKind k) {
  switch (k) {
    case ParamKind::Int: return "INT";
    case ParamKind::UInt: return "UINT";
    case ParamKind::Double: return "FLOAT";
    case ParamKind::Bool: return "BOOL";
    case ParamKind::String: return "TEXT";
    case ParamKind::IntList: return "INT,...";
    case ParamKind::DoubleList: return "FLOAT,...";
  }
  return "TEXT";
}

struct Subcommand {
  const ExperimentSpec* spec = nullptr;
  CLI::App* app = nullptr;
  std::string config;
  bool verbose = false;
  std::map<std::string, std::string> raw;  // node-stable storage for CLI11
  std::map<std::string, CLI::Option*> options;
};

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"harqerr: HARQ error-model experiments (PEP sweeps, link simulation, fading averages)"};
  app.set_version_flag("--version", std::string(HARQERR_VERSION));
  app.require_subcommand(1);

  std::vector<Subcommand> subs(experiments().size());
  for (std::size_t i = 0; i < subs.size(); ++i) {
    Subcommand& s = subs[i];
    s.spec = &experiments()[i];
    s.app = app.add_subcommand(s.spec->name, s.spec->description);
    s.app->add_option("--config,-c", s.config, "JSON config file; flags override its keys");
    s.app->add_flag("--verbose,-v", s.verbose, "log dB->linear conversions and progress to stderr");
    for (const ParamSpec& p : s.spec->params) {
      std::string help = p.help + " [default: " + p.fallback.dump() + "]";
      s.options[p.key] = s.app->add_option(flag_name(p.key), s.raw[p.key], help)->type_name(type_name(p.kind));
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  Subcommand* chosen = nullptr;
  for (Subcommand& s : subs)
    if (s.app->parsed()) chosen = &s;
  if (!chosen) return kExitConfig;
  const std::string& name = chosen->spec->name;

  try {
    std::vector<std::pair<std::string, std::string>> flags;
    for (const ParamSpec& p : chosen->spec->params)
      if (chosen->options[p.key]->count() > 0) flags.emplace_back(p.key, chosen->raw[p.key]);
    Json file = Json::object();
    if (!chosen->config.empty()) file = load_config_file(chosen->config);
    const ResolvedConfig cfg = resolve_config(*chosen->spec, file, flags);

    const ExperimentResult result = run_experiment(name, cfg.values, chosen->verbose ? &err : nullptr);
    const OutputPaths paths = resolve_outputs(name, cfg.values.at("out").get<std::string>());

    Json report;
    report["tool"] = "harqerr";
    report["version"] = HARQERR_VERSION;
    report["experiment"] = name;
    report["seed"] = cfg.values.at("seed");
    report["seed_source"] = cfg.sources.at("seed").get<std::string>() == "default"
                                ? "default (no seed given; using the built-in default)"
                                : cfg.sources.at("seed").get<std::string>();
    report["config_file"] = chosen->config;
    report["config"] = cfg.values;
    report["sources"] = cfg.sources;
    report["linear_inputs"] = result.linear_inputs;
    report["summary"] = result.summary;
    report["columns"] = result.table.columns;
    report["rows"] = result.table.rows.size();
    report["outputs"] = {{"csv", paths.csv.string()}, {"report", paths.report.string()}};

    write_file(paths.csv, to_csv(result.table));
    write_file(paths.report, report.dump(2) + "\n");
    out << "wrote " << paths.csv.string() << " (" << result.table.rows.size() << " rows)\n";
    out << "wrote " << paths.report.string() << "\n";
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "harqerr " << name << ": " << e.what() << "\n";
    return kExitConfig;
  } catch (const IoError& e) {
    err << "harqerr " << name << ": I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    err << "harqerr " << name << ": " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace harqerr::cli
