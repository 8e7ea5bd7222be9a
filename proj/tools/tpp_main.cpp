#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "tpp/analyzer.hpp"
#include "tpp/assembler.hpp"
#include "tpp/experiments.hpp"
#include "tpp/memmap.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitViolation = 1;  // analyze found policy violations
constexpr int kExitConfig = 2;     // bad input, parse error, unknown name
constexpr int kExitRuntime = 3;    // an experiment's built-in check failed

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw tpp::TppError(tpp::Errc::ConfigError, "cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::vector<uint8_t> slurp_bytes(const std::string& path) {
  std::string s = slurp(path);
  return {s.begin(), s.end()};
}

void dump(const std::string& path, const void* data, std::size_t n) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw tpp::TppError(tpp::Errc::ConfigError, "cannot write " + path);
  out.write(static_cast<const char*>(data), std::streamsize(n));
}

uint16_t parse_u16(const nlohmann::json& v) {
  if (v.is_string()) return uint16_t(std::stoul(v.get<std::string>(), nullptr, 0));
  return v.get<uint16_t>();
}

std::vector<tpp::MemoryPolicy> load_policies(const std::string& path) {
  std::vector<tpp::MemoryPolicy> out;
  auto j = nlohmann::json::parse(slurp(path));
  for (const auto& p : j.is_array() ? j : j.at("policies")) {
    tpp::MemoryPolicy pol;
    pol.appid = p.at("appid").get<uint64_t>();
    pol.op = p.at("op").get<std::string>() == "write" ? tpp::AccessOp::Write : tpp::AccessOp::Read;
    pol.start = parse_u16(p.at("start"));
    pol.end = parse_u16(p.at("end"));
    out.push_back(pol);
  }
  return out;
}

// Program input: assembly text, or a binary encoding when --binary is given.
tpp::TppProgram load_program(const std::string& path, bool binary) {
  if (binary) return tpp::decode(slurp_bytes(path));
  return tpp::assemble(slurp(path));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tiny packet program toolchain"};
  app.require_subcommand(1);

  std::string input, output, policies_path, check_path, outdir = "out";
  std::string experiment;
  bool binary = false, deny_writes = false;
  uint64_t appid = 0, seed = 1;
  double duration = 0;

  auto* casm = app.add_subcommand("asm", "Assemble a program to its wire encoding");
  casm->add_option("input", input)->required();
  casm->add_option("-o,--output", output, "Write binary here (default: hex to stdout)");

  auto* cdis = app.add_subcommand("disasm", "Disassemble a wire encoding");
  cdis->add_option("input", input)->required();

  auto* cana = app.add_subcommand("analyze", "Static access analysis of a program");
  cana->add_option("input", input)->required();
  cana->add_flag("--binary", binary, "Input is a wire encoding, not assembly text");
  cana->add_option("--policies", policies_path, "JSON list of (appid, op, start, end) grants");
  cana->add_option("--appid", appid);
  cana->add_flag("--deny-writes", deny_writes);

  auto* crun = app.add_subcommand("run", "Run a bundled experiment");
  crun->add_option("experiment", experiment)->required();
  crun->add_option("--out", outdir);
  crun->add_option("--seed", seed);
  crun->add_option("--duration", duration, "Simulated seconds (0 = preset default)");

  app.add_subcommand("list-experiments", "List bundled experiments");

  auto* cmap = app.add_subcommand("memory-map", "Print the unified memory map");
  cmap->add_option("--check", check_path, "Compare against a file instead of printing");

  CLI11_PARSE(app, argc, argv);

  try {
    if (casm->parsed()) {
      auto bytes = tpp::encode(tpp::assemble(slurp(input)));
      if (!output.empty()) {
        dump(output, bytes.data(), bytes.size());
      } else {
        for (std::size_t i = 0; i < bytes.size(); ++i)
          printf("%02x%s", bytes[i], (i + 1) % 16 == 0 ? "\n" : " ");
        if (bytes.size() % 16) printf("\n");
      }
      return kExitOk;
    }
    if (cdis->parsed()) {
      std::cout << tpp::disassemble(tpp::decode(slurp_bytes(input)));
      return kExitOk;
    }
    if (cana->parsed()) {
      std::vector<tpp::MemoryPolicy> policies;
      if (!policies_path.empty()) policies = load_policies(policies_path);
      auto report = tpp::analyze(load_program(input, binary), policies, appid, deny_writes);
      std::cout << tpp::report_text(report);
      return report.admissible() ? kExitOk : kExitViolation;
    }
    if (crun->parsed()) {
      auto result = tpp::run_experiment(experiment, outdir, seed, duration);
      for (const auto& [k, v] : result.metrics) std::cout << k << " = " << v << "\n";
      std::cout << (result.ok ? "ok" : "FAILED") << "\n";
      return result.ok ? kExitOk : kExitRuntime;
    }
    if (app.get_subcommand("list-experiments")->parsed()) {
      for (const auto& name : tpp::experiment_names()) std::cout << name << "\n";
      return kExitOk;
    }
    if (cmap->parsed()) {
      std::string doc = tpp::memory_map_markdown();
      if (check_path.empty()) {
        std::cout << doc;
        return kExitOk;
      }
      if (slurp(check_path) != doc) {
        std::cerr << check_path << " is out of date; regenerate with: tpp memory-map\n";
        return kExitViolation;
      }
      return kExitOk;
    }
  } catch (const tpp::TppError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}
