#include "tpp/endhost.hpp"

#include <algorithm>
#include <mutex>

#include "tpp/exec.hpp"
#include "tpp/memmap.hpp"

namespace tpp {

uint64_t ControlAgent::add_tpp(TppRule rule) {
  AnalysisReport report = analyze(rule.tpp, policies, rule.appid, deny_writes);
  if (!report.admissible())
    throw TppError(Errc::PolicyViolation, report_text(report));
  std::unique_lock lock(mu_);
  rule.id = next_id_++;
  rules_.push_back(std::move(rule));
  return rules_.back().id;
}

bool ControlAgent::remove(uint64_t id) {
  std::unique_lock lock(mu_);
  auto it = std::find_if(rules_.begin(), rules_.end(), [&](const TppRule& r) { return r.id == id; });
  if (it == rules_.end()) return false;
  rules_.erase(it);
  return true;
}

std::vector<TppRule> ControlAgent::list() const {
  std::shared_lock lock(mu_);
  return rules_;
}

std::optional<TppRule> ControlAgent::match(const Packet& p) const {
  std::shared_lock lock(mu_);
  const TppRule* best = nullptr;
  for (const auto& r : rules_) {
    if (!r.filter.matches(p)) continue;
    if (!best || r.filter.priority > best->filter.priority ||
        (r.filter.priority == best->filter.priority && r.id < best->id))
      best = &r;
  }
  return best ? std::optional<TppRule>(*best) : std::nullopt;
}

void Shim::on_transmit(Packet& pkt) {
  if (pkt.tpp) return;  // already instrumented
  auto rule = agent_->match(pkt);
  if (!rule) return;
  if (rule->sample_every > 1 &&
      std::uniform_int_distribution<uint32_t>(0, rule->sample_every - 1)(rng_) != 0)
    return;
  TppProgram tpp = rule->tpp;
  if (pkt.size_bytes + tpp.wire_size() > mtu_bytes) {
    ++mtu_skips;
    return;
  }
  tpp.encap = Encap::Transparent;
  pkt.size_bytes += uint32_t(tpp.wire_size());
  pkt.tpp = std::move(tpp);
}

bool Shim::on_receive(Network& net, int self, const PacketPtr& pkt) {
  if (!pkt->tpp) return false;
  const TppProgram& tpp = *pkt->tpp;

  auto it = collectors_.find(tpp.header.session_id);
  if (it != collectors_.end()) {
    it->second(tpp, *pkt);
    if (tpp.encap == Encap::Transparent) {
      // Strip the header and hand the inner packet back to the application.
      pkt->size_bytes -= uint32_t(tpp.wire_size());
      pkt->tpp.reset();
      return false;
    }
    return true;
  }

  if (tpp.encap == Encap::Standalone) {
    // Not ours: bounce it back so the sender's collector sees the hops it
    // gathered on the way here (and on the way back).
    auto echo = net.make_packet();
    echo->src = self;
    echo->dst = pkt->src;
    echo->flow_id = pkt->flow_id;
    echo->tag = pkt->tag;
    echo->tpp = tpp;
    echo->size_bytes = kStandaloneOverheadBytes + uint32_t(tpp.wire_size());
    net.send(self, std::move(echo));
    return true;
  }

  // Transparent TPP nobody asked for: drop the record, deliver the inner
  // packet untouched.
  ++unknown_sessions;
  pkt->size_bytes -= uint32_t(tpp.wire_size());
  pkt->tpp.reset();
  return false;
}

namespace {

struct ReliableCall : std::enable_shared_from_this<ReliableCall> {
  Network* net;
  int self;
  int target;
  TppProgram tpp;
  ExecutorOptions opts;
  std::function<void(std::optional<TppProgram>)> done;
  int attempts = 0;
  bool finished = false;
  uint64_t token;

  void attempt() {
    if (finished) return;
    if (attempts++ >= opts.max_attempts) {
      finished = true;
      done(std::nullopt);
      return;
    }
    auto pkt = net->make_packet();
    pkt->src = self;
    pkt->dst = target;
    pkt->tag = int(token);
    pkt->tpp = tpp;
    pkt->tpp->encap = Encap::Standalone;
    pkt->size_bytes = kStandaloneOverheadBytes + uint32_t(tpp.wire_size());
    net->send(self, std::move(pkt));
    auto self_ptr = shared_from_this();
    net->after(opts.timeout_ns, [self_ptr] { self_ptr->attempt(); });
  }

  void on_response(const TppProgram& result) {
    if (finished) return;
    finished = true;
    done(result);
  }
};

// Responses are matched to calls by token: each in-flight call stamps its
// token into the packet tag, which the switch echo preserves.
struct ReliableDispatcher {
  std::map<uint64_t, std::shared_ptr<ReliableCall>> calls;
  uint64_t next_token = 1;
  bool hooked = false;
};

struct NetExecState {
  std::map<int, ReliableDispatcher> per_host;
};

NetExecState& exec_state(Network& net) {
  auto& slot = net.app_state["executor"];
  if (!slot) slot = std::make_shared<NetExecState>();
  return *std::static_pointer_cast<NetExecState>(slot);
}

}  // namespace

void execute_reliable(Network& net, int self, int target, TppProgram tpp,
                      const ExecutorOptions& opts,
                      std::function<void(std::optional<TppProgram>)> done) {
  auto& disp = exec_state(net).per_host[self];
  if (!disp.hooked) {
    disp.hooked = true;
    net.set_receiver(self, [&net, self](PacketPtr pkt) {
      if (!pkt->tpp) return;
      auto& d = exec_state(net).per_host[self];
      auto it = d.calls.find(uint64_t(pkt->tag));
      if (it == d.calls.end()) return;
      auto call = it->second;
      d.calls.erase(it);
      call->on_response(*pkt->tpp);
    });
  }
  auto call = std::make_shared<ReliableCall>();
  call->net = &net;
  call->self = self;
  call->target = target;
  call->tpp = std::move(tpp);
  call->opts = opts;
  call->done = std::move(done);
  call->token = disp.next_token++;
  disp.calls[call->token] = call;
  call->attempt();
}

TppProgram make_targeted(const TppProgram& payload, Word switch_id, uint8_t max_hops) {
  if (payload.instructions.size() + 1 > kMaxInstructions)
    throw TppError(Errc::TooManyInstructions, "targeted payload must leave room for the gate");

  // Normalize the payload to hop 0 with fresh stack state, then serialize its
  // PUSH/POP into fixed slots so every operand is a hop-relative offset.
  TppProgram norm = payload;
  uint8_t payload_words = norm.header.hop_size_words;
  if (payload_words == 0)
    payload_words = uint8_t(std::count_if(
        norm.instructions.begin(), norm.instructions.end(),
        [](const Instruction& i) { return i.op == Opcode::Push || i.op == Opcode::Pop; }));
  norm.header.insn_count = uint8_t(norm.instructions.size());
  norm.header.hop_size_words = payload_words;
  norm.header.hop_index = 0;
  norm.header.sp = 0;
  norm.header.mem_len = uint16_t(payload_words) * 2;
  norm.memory.assign(norm.header.mem_len, 0);
  if (payload_words > 0) norm = rewrite_push_pop(norm);

  // Words 0..3 of each hop region hold the gate's (mask, value) block; the
  // payload's slots shift up past them.
  TppProgram out;
  out.instructions.push_back(make_cexec(addr::kSwitchId, 0));
  for (const Instruction& in : norm.instructions) {
    switch (in.op) {
      case Opcode::Load:
        out.instructions.push_back(make_load(in.addr, uint8_t(in.hop_offset() + 4)));
        break;
      case Opcode::Store:
        out.instructions.push_back(make_store(in.addr, uint8_t(in.hop_offset() + 4)));
        break;
      case Opcode::Cexec:
        out.instructions.push_back(make_cexec(in.addr, uint8_t(in.hop_offset() + 4)));
        break;
      case Opcode::Cstore:
        if (in.pre_offset() + 4 > 15 || in.post_offset() + 4 > 15)
          throw TppError(Errc::BadOperand, "CSTORE slot does not fit after the gate block");
        out.instructions.push_back(
            make_cstore(in.addr, uint8_t(in.pre_offset() + 4), uint8_t(in.post_offset() + 4)));
        break;
      default:
        out.instructions.push_back(in);
        break;
    }
  }
  out.header.insn_count = uint8_t(out.instructions.size());
  out.header.hop_size_words = uint8_t(4 + payload_words);
  out.header.mem_len = uint16_t(max_hops) * out.header.hop_size_words * 2;
  out.header.session_id = payload.header.session_id;
  out.memory.assign(out.header.mem_len, 0xff);
  for (unsigned h = 0; h < max_hops; ++h) {
    std::size_t base = std::size_t(h) * out.header.hop_size_words * 2;
    out.set_mem_word(base + 0, 0);       // mask = 0x0000ffff: compare the low word
    out.set_mem_word(base + 2, 0xffff);
    out.set_mem_word(base + 4, 0);       // value = the target's switch id
    out.set_mem_word(base + 6, switch_id);
  }
  return out;
}

void execute_targeted(Network& net, int self, int dest, Word switch_id, TppProgram payload,
                      const ExecutorOptions& opts,
                      std::function<void(std::optional<TppProgram>)> done) {
  execute_reliable(net, self, dest, make_targeted(payload, switch_id), opts, std::move(done));
}

void scatter_gather(Network& net, int self, const std::vector<int>& targets, TppProgram tpp,
                    const ExecutorOptions& opts,
                    std::function<void(std::vector<std::optional<TppProgram>>)> done) {
  struct Gather {
    std::vector<std::optional<TppProgram>> results;
    std::size_t pending;
    std::function<void(std::vector<std::optional<TppProgram>>)> done;
  };
  auto g = std::make_shared<Gather>();
  g->results.resize(targets.size());
  g->pending = targets.size();
  g->done = std::move(done);
  for (std::size_t i = 0; i < targets.size(); ++i)
    execute_reliable(net, self, targets[i], tpp, opts,
                     [g, i](std::optional<TppProgram> r) {
                       g->results[i] = std::move(r);
                       if (--g->pending == 0) g->done(std::move(g->results));
                     });
  if (targets.empty()) g->done({});
}

std::vector<TppProgram> split_large(const TppProgram& p, std::size_t mtu) {
  TppProgram base = rewrite_push_pop(p);
  const std::size_t fixed = kHeaderBytes + kInstructionBytes * base.instructions.size();
  const std::size_t hop_bytes = std::size_t(base.header.hop_size_words) * 2;
  if (hop_bytes == 0 || base.header.mem_len % hop_bytes != 0)
    throw TppError(Errc::Unsplittable, "packet memory is not a whole number of hop regions");
  if (fixed + hop_bytes > mtu)
    throw TppError(Errc::Unsplittable, "a single hop region does not fit in the MTU");
  const std::size_t total_hops = base.header.mem_len / hop_bytes;
  const std::size_t hops_per_pkt = std::min(total_hops, (mtu - fixed) / hop_bytes);

  std::vector<TppProgram> out;
  for (std::size_t first = 0; first < total_hops; first += hops_per_pkt) {
    std::size_t count = std::min(hops_per_pkt, total_hops - first);
    TppProgram part = base;
    // Hops before this window see a huge hop index; hops after it run off the
    // end of packet memory.  Both address past mem_len and skip gracefully.
    part.header.hop_index = uint8_t((256 - first) % 256);
    part.memory.assign(count * hop_bytes, 0);
    std::copy(base.memory.begin() + first * hop_bytes,
              base.memory.begin() + (first + count) * hop_bytes, part.memory.begin());
    part.header.mem_len = uint16_t(part.memory.size());
    part.header.sp = 0;
    out.push_back(std::move(part));
  }
  return out;
}

}  // namespace tpp
