// hypclass: classification, transition and factorization reports for
// second-order symbols with double characteristics.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "hypclass/error.hpp"
#include "hypclass/report.hpp"
#include "hypclass/symbol_file.hpp"

namespace fs = std::filesystem;
using namespace hypclass;

namespace {

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out << content;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral type, transition invariants and factorization checks for hyperbolic symbols"};
  std::string command;
  std::vector<std::string> target;
  std::string file, out_dir;
  std::optional<int> k;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  bool csv = false, json = false;

  std::string cmds;
  for (const auto& c : command_names()) cmds += (cmds.empty() ? "" : ", ") + c;
  app.add_option("command", command, "One of: " + cmds)->required();
  app.add_option("target", target, "Built-in name (" + std::string("rei1, rei2, rei3") +
                                       ") followed by key=value parameters");
  app.add_option("--file", file, "Symbol file");
  app.add_option("--k", k, "Shorthand for k=<int>");
  app.add_option("--seed", seed, "Sampling seed");
  app.add_option("--tol", tol, "Main tolerance of the command");
  app.add_option("--out", out_dir, "Directory for report.json, report.txt and CSV files");
  app.add_flag("--csv", csv, "Emit the trajectory CSV (flow)");
  app.add_flag("--json", json, "Print the JSON report instead of text");
  CLI11_PARSE(app, argc, argv);

  try {
    bool known = false;
    for (const auto& c : command_names()) known = known || c == command;
    if (!known) throw Error(ErrorKind::Precondition, "unknown command '" + command + "' (expected " + cmds + ")");

    RunOptions opt;
    opt.seed = seed;
    opt.tol = tol;
    opt.csv = csv;

    Report rep;
    if (command == "selftest") {
      if (!target.empty() || !file.empty()) throw Error(ErrorKind::Precondition, "selftest takes no input");
      rep = run_selftest(seed.value_or(42));
    } else {
      Problem pb = [&]() {
        if (!file.empty()) {
          if (!target.empty()) throw Error(ErrorKind::Precondition, "give either a built-in or --file, not both");
          std::string text = read_file(file);
          opt.input_digest = digest(text);
          return parse_symbol_text(text, file);
        }
        if (target.empty()) throw Error(ErrorKind::Precondition, "missing input: a built-in name or --file");
        std::map<std::string, std::string> kv;
        for (std::size_t i = 1; i < target.size(); ++i) {
          auto eq = target[i].find('=');
          if (eq == std::string::npos || eq == 0)
            throw Error(ErrorKind::Precondition, "expected key=value, got '" + target[i] + "'");
          kv[target[i].substr(0, eq)] = target[i].substr(eq + 1);
        }
        if (k) kv["k"] = std::to_string(*k);
        return builtin(target[0], kv);
      }();
      rep = run(command, pb, opt);
    }

    if (!out_dir.empty()) {
      fs::create_directories(out_dir);
      write_file(fs::path(out_dir) / "report.json", rep.json());
      write_file(fs::path(out_dir) / "report.txt", rep.text());
    }
    for (const auto& [name, content] : rep.files)
      write_file(fs::path(out_dir.empty() ? "." : out_dir) / name, content);
    std::cout << (json ? rep.json() : rep.text());
    return rep.ok ? 0 : 1;
  } catch (const Error& e) {
    std::cerr << "hypclass: " << to_string(e.kind()) << " error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "hypclass: " << e.what() << "\n";
    return 2;
  }
}
