#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "tpp/assembler.hpp"
#include "tpp/endhost.hpp"

// Manages a host's installed TPP rules, persisted as a JSON store:
//   { "policies": [{appid, op, start, end}], "deny_writes": bool,
//     "rules": [{id, appid, priority, sample_every, program, comment}] }

namespace {

nlohmann::json load_store(const std::string& path) {
  std::ifstream in(path);
  if (!in) return {{"policies", nlohmann::json::array()}, {"rules", nlohmann::json::array()}};
  nlohmann::json j;
  in >> j;
  if (!j.contains("rules")) j["rules"] = nlohmann::json::array();
  if (!j.contains("policies")) j["policies"] = nlohmann::json::array();
  return j;
}

void save_store(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw tpp::TppError(tpp::Errc::ConfigError, "cannot write " + path);
  out << j.dump(2) << "\n";
}

uint16_t parse_u16(const nlohmann::json& v) {
  if (v.is_string()) return uint16_t(std::stoul(v.get<std::string>(), nullptr, 0));
  return v.get<uint16_t>();
}

void configure_agent(tpp::ControlAgent& agent, const nlohmann::json& store) {
  agent.deny_writes = store.value("deny_writes", false);
  for (const auto& p : store["policies"]) {
    tpp::MemoryPolicy pol;
    pol.appid = p.at("appid").get<uint64_t>();
    pol.op = p.at("op").get<std::string>() == "write" ? tpp::AccessOp::Write : tpp::AccessOp::Read;
    pol.start = parse_u16(p.at("start"));
    pol.end = parse_u16(p.at("end"));
    agent.policies.push_back(pol);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Install and list per-host TPP instrumentation rules"};
  app.require_subcommand(1);

  std::string store_path = "tpp_rules.json", program_path, comment;
  uint64_t appid = 0, rule_id = 0;
  int priority = 0;
  uint32_t sample_every = 1;
  app.add_option("--store", store_path, "Rule store file")->capture_default_str();

  auto* cadd = app.add_subcommand("add-tpp", "Validate and install a rule");
  cadd->add_option("--program", program_path, "Assembly text of the TPP")->required();
  cadd->add_option("--appid", appid);
  cadd->add_option("--priority", priority);
  cadd->add_option("--sample-every", sample_every, "Attach to 1 in N matching packets");
  cadd->add_option("--comment", comment);

  app.add_subcommand("list-rules", "Print installed rules");

  auto* crm = app.add_subcommand("remove", "Remove a rule by id");
  crm->add_option("--id", rule_id)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    nlohmann::json store = load_store(store_path);

    if (cadd->parsed()) {
      std::ifstream in(program_path);
      if (!in) throw tpp::TppError(tpp::Errc::ConfigError, "cannot open " + program_path);
      std::ostringstream os;
      os << in.rdbuf();
      tpp::TppProgram prog = tpp::assemble(os.str());

      tpp::ControlAgent agent;
      configure_agent(agent, store);
      tpp::TppRule rule;
      rule.appid = appid;
      rule.filter.priority = priority;
      rule.tpp = prog;
      rule.sample_every = sample_every;
      rule.comment = comment;
      agent.add_tpp(rule);  // throws PolicyViolation when inadmissible

      uint64_t id = store.value("next_id", 1ull);
      store["next_id"] = id + 1;
      store["rules"].push_back({{"id", id},
                                {"appid", appid},
                                {"priority", priority},
                                {"sample_every", sample_every},
                                {"program", tpp::disassemble(prog)},
                                {"comment", comment}});
      save_store(store_path, store);
      std::cout << "installed rule " << id << "\n";
      return 0;
    }
    if (app.get_subcommand("list-rules")->parsed()) {
      for (const auto& r : store["rules"])
        std::cout << r.at("id").get<uint64_t>() << "\tappid=" << r.at("appid").get<uint64_t>()
                  << "\tpriority=" << r.at("priority").get<int>()
                  << "\tsample_every=" << r.at("sample_every").get<uint32_t>() << "\t"
                  << r.value("comment", "") << "\n";
      return 0;
    }
    if (crm->parsed()) {
      auto& rules = store["rules"];
      auto before = rules.size();
      rules.erase(std::remove_if(rules.begin(), rules.end(),
                                 [&](const nlohmann::json& r) {
                                   return r.at("id").get<uint64_t>() == rule_id;
                                 }),
                  rules.end());
      if (rules.size() == before) {
        std::cerr << "no rule with id " << rule_id << "\n";
        return 2;
      }
      save_store(store_path, store);
      std::cout << "removed rule " << rule_id << "\n";
      return 0;
    }
  } catch (const tpp::TppError& e) {
    if (e.code() == tpp::Errc::PolicyViolation) {
      std::cerr << "rejected: " << e.what() << "\n";
      return 1;
    }
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
