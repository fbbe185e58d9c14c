#include "gridmc/state_space.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <ostream>
#include <set>
#include <unordered_map>

namespace gridmc {

namespace {

// Postfix program over the state valuation. Everything runs on doubles;
// booleans are 0/1. Exact for the integer ranges this tool deals with.
struct Prog {
  enum Code : std::uint8_t {
    kConst, kVar, kNot, kNeg, kAdd, kSub, kMul, kDiv,
    kEq, kNe, kLt, kLe, kGt, kGe, kAnd, kOr,
  };
  struct Instr {
    Code code;
    std::int32_t arg;  // const pool / variable index
  };
  std::vector<Instr> instrs;
  std::vector<double> pool;
  int max_stack = 0;

  double run(const std::int32_t* st, double* stack) const {
    double* sp = stack;
    for (const auto& in : instrs) {
      switch (in.code) {
        case kConst: *sp++ = pool[in.arg]; break;
        case kVar: *sp++ = st[in.arg]; break;
        case kNot: sp[-1] = sp[-1] == 0.0 ? 1.0 : 0.0; break;
        case kNeg: sp[-1] = -sp[-1]; break;
        case kAdd: sp[-2] = sp[-2] + sp[-1]; --sp; break;
        case kSub: sp[-2] = sp[-2] - sp[-1]; --sp; break;
        case kMul: sp[-2] = sp[-2] * sp[-1]; --sp; break;
        case kDiv:
          if (sp[-1] == 0.0) throw EvalError("division by zero during state evaluation");
          sp[-2] = sp[-2] / sp[-1];
          --sp;
          break;
        case kEq: sp[-2] = sp[-2] == sp[-1] ? 1.0 : 0.0; --sp; break;
        case kNe: sp[-2] = sp[-2] != sp[-1] ? 1.0 : 0.0; --sp; break;
        case kLt: sp[-2] = sp[-2] < sp[-1] ? 1.0 : 0.0; --sp; break;
        case kLe: sp[-2] = sp[-2] <= sp[-1] ? 1.0 : 0.0; --sp; break;
        case kGt: sp[-2] = sp[-2] > sp[-1] ? 1.0 : 0.0; --sp; break;
        case kGe: sp[-2] = sp[-2] >= sp[-1] ? 1.0 : 0.0; --sp; break;
        case kAnd: sp[-2] = (sp[-2] != 0.0 && sp[-1] != 0.0) ? 1.0 : 0.0; --sp; break;
        case kOr: sp[-2] = (sp[-2] != 0.0 || sp[-1] != 0.0) ? 1.0 : 0.0; --sp; break;
      }
    }
    return stack[0];
  }
};

struct Compiler {
  const std::map<std::string, std::uint32_t, std::less<>>& var_index;

  Prog compile(const Expr& e) const {
    Prog p;
    int depth = 0;
    emit(e, p, depth);
    return p;
  }

  void emit(const Expr& e, Prog& p, int& depth) const {
    struct V {
      const Compiler& c;
      Prog& p;
      int& depth;
      void push(Prog::Code code, std::int32_t arg) {
        p.instrs.push_back({code, arg});
        p.max_stack = std::max(p.max_stack, ++depth);
      }
      void operator()(const IntLit& n) {
        p.pool.push_back(static_cast<double>(n.v));
        push(Prog::kConst, static_cast<std::int32_t>(p.pool.size() - 1));
      }
      void operator()(const RealLit& n) {
        p.pool.push_back(n.v);
        push(Prog::kConst, static_cast<std::int32_t>(p.pool.size() - 1));
      }
      void operator()(const BoolLit& n) {
        p.pool.push_back(n.v ? 1.0 : 0.0);
        push(Prog::kConst, static_cast<std::int32_t>(p.pool.size() - 1));
      }
      void operator()(const Ident& n) {
        auto it = c.var_index.find(n.name);
        if (it == c.var_index.end())
          throw BuildError("identifier `" + n.name + "` is not a state variable");
        push(Prog::kVar, static_cast<std::int32_t>(it->second));
      }
      void operator()(const Not& n) {
        c.emit(*n.c, p, depth);
        p.instrs.push_back({Prog::kNot, 0});
      }
      void operator()(const Neg& n) {
        c.emit(*n.c, p, depth);
        p.instrs.push_back({Prog::kNeg, 0});
      }
      void operator()(const BinOp& n) {
        c.emit(*n.lhs, p, depth);
        c.emit(*n.rhs, p, depth);
        Prog::Code code;
        switch (n.op) {
          case Op::Add: code = Prog::kAdd; break;
          case Op::Sub: code = Prog::kSub; break;
          case Op::Mul: code = Prog::kMul; break;
          case Op::Div: code = Prog::kDiv; break;
          case Op::Eq: code = Prog::kEq; break;
          case Op::Ne: code = Prog::kNe; break;
          case Op::Lt: code = Prog::kLt; break;
          case Op::Le: code = Prog::kLe; break;
          case Op::Gt: code = Prog::kGt; break;
          case Op::Ge: code = Prog::kGe; break;
          case Op::And: code = Prog::kAnd; break;
          default: code = Prog::kOr; break;
        }
        p.instrs.push_back({code, 0});
        --depth;
      }
    };
    std::visit(V{*this, p, depth}, e.node);
  }
};

struct CompiledUpdate {
  std::uint32_t target;
  Prog value;
};

struct CompiledCommand {
  int module;
  std::int32_t label;  // -1 unlabeled
  int line;
  Prog guard, rate;
  bool has_rate;
  std::vector<CompiledUpdate> updates;
};

struct SyncGroup {
  std::int32_t label;
  std::vector<std::vector<std::uint32_t>> per_module;  // command indices
};

struct FoldedRewardItem {
  ExprPtr guard, value;
  std::int32_t label;  // -2 state item, -1 unlabeled transition item, >=0 labeled
  Prog cguard, cvalue;
};

struct FoldedReward {
  std::string name;
  std::vector<FoldedRewardItem> items;
};

}  // namespace

struct StateSpace::Impl {
  std::vector<VarInfo> vars;
  std::map<std::string, std::uint32_t, std::less<>> var_index;
  std::vector<std::string> labels;

  std::vector<std::int32_t> state_data;  // num_states * vars.size()
  std::uint32_t n = 0;
  std::uint32_t init = 0;

  std::vector<Transition> trans;
  std::vector<std::uint32_t> rows;  // n+1
  std::vector<double> exit;

  std::vector<CompiledCommand> commands;
  std::vector<std::uint32_t> unlabeled;  // indices into commands
  std::vector<SyncGroup> sync;
  std::vector<FoldedReward> rewards;
  Env consts;
  std::map<std::string, ExprPtr, std::less<>> formulas;

  // state lookup (kept for transition-index queries after the build)
  std::unordered_map<std::uint64_t, std::uint32_t> key_to_id;
  bool packable = true;
  std::vector<int> shift;  // bit offset per var when packable

  std::uint64_t pack(const std::int32_t* st) const {
    std::uint64_t key = 0;
    for (std::size_t i = 0; i < vars.size(); ++i)
      key |= static_cast<std::uint64_t>(st[i] - vars[i].lo) << shift[i];
    return key;
  }

  const std::int32_t* state(std::uint32_t idx) const {
    return state_data.data() + static_cast<std::size_t>(idx) * vars.size();
  }

  // Enumerate the transition instances leaving `st` in deterministic order.
  // emit(combo, len, rate, label, dst) — dst is a scratch valuation.
  template <class F>
  void enumerate(const std::int32_t* st, std::int32_t* dst, double* stack, F&& emit) const {
    auto apply = [&](const CompiledCommand* const* combo, int len, double rate,
                     std::int32_t label) {
      std::memcpy(dst, st, vars.size() * sizeof(std::int32_t));
      std::uint64_t written = 0;
      for (int i = 0; i < len; ++i) {
        for (const auto& u : combo[i]->updates) {
          std::uint64_t bit = 1ull << (u.target % 64);
          if (len > 1 && (written & bit) != 0)
            throw BuildError("conflicting synchronized writes to `" + vars[u.target].name +
                             "` on action `" + labels[label] + "`");
          written |= bit;
          double v = u.value.run(st, stack);
          auto iv = static_cast<std::int32_t>(std::llround(v));
          const VarInfo& info = vars[u.target];
          if (iv < info.lo || iv > info.hi)
            throw BuildError("update drives `" + info.name + "` to " + std::to_string(iv) +
                             ", outside [" + std::to_string(info.lo) + ".." +
                             std::to_string(info.hi) + "] (command at line " +
                             std::to_string(combo[i]->line) + ")");
          dst[u.target] = iv;
        }
      }
      emit(combo, len, rate, label);
    };

    for (auto ci : unlabeled) {
      const CompiledCommand& c = commands[ci];
      if (c.guard.run(st, stack) == 0.0) continue;
      double rate = c.has_rate ? c.rate.run(st, stack) : 1.0;
      if (rate < 0) throw BuildError("negative rate in command at line " + std::to_string(c.line));
      if (rate == 0) continue;
      const CompiledCommand* combo[1] = {&c};
      apply(combo, 1, rate, -1);
    }

    std::vector<const CompiledCommand*> enabled;  // flattened, with per-module extents
    std::vector<std::pair<int, int>> extents;
    for (const auto& g : sync) {
      enabled.clear();
      extents.clear();
      bool blocked = false;
      for (const auto& cmds : g.per_module) {
        int start = static_cast<int>(enabled.size());
        for (auto ci : cmds) {
          const CompiledCommand& c = commands[ci];
          if (c.guard.run(st, stack) != 0.0) enabled.push_back(&c);
        }
        if (enabled.size() == static_cast<std::size_t>(start)) {
          blocked = true;
          break;
        }
        extents.emplace_back(start, static_cast<int>(enabled.size()));
      }
      if (blocked) continue;
      // odometer over the per-module enabled lists
      int k = static_cast<int>(extents.size());
      std::vector<int> pick(k);
      for (int i = 0; i < k; ++i) pick[i] = extents[i].first;
      std::vector<const CompiledCommand*> combo(k);
      for (;;) {
        double rate = 1.0;
        for (int i = 0; i < k; ++i) {
          combo[i] = enabled[pick[i]];
          rate *= combo[i]->has_rate ? combo[i]->rate.run(st, stack) : 1.0;
        }
        if (rate < 0)
          throw BuildError("negative synchronized rate on action `" + labels[g.label] + "`");
        if (rate > 0) apply(combo.data(), k, rate, g.label);
        int i = k - 1;
        while (i >= 0 && ++pick[i] == extents[i].second) pick[i] = extents[i].first, --i;
        if (i < 0) break;
      }
    }
  }
};

namespace {

std::shared_ptr<StateSpace::Impl> prepare(const ModelIR& m) {
  auto impl = std::make_shared<StateSpace::Impl>();
  impl->consts = m.constant_env();
  impl->formulas = m.formula_table();
  const Env& consts = impl->consts;
  const auto& formulas = impl->formulas;

  auto add_var = [&](const VarDecl& v) {
    VarInfo info;
    info.name = v.name;
    info.is_bool = v.is_bool;
    if (v.is_bool) {
      info.lo = 0;
      info.hi = 1;
    } else {
      auto lo = fold_constants(v.lo, consts, formulas);
      auto hi = fold_constants(v.hi, consts, formulas);
      if (!std::holds_alternative<IntLit>(lo->node) || !std::holds_alternative<IntLit>(hi->node))
        throw BuildError("range of `" + v.name + "` does not fold to constants");
      info.lo = static_cast<std::int32_t>(std::get<IntLit>(lo->node).v);
      info.hi = static_cast<std::int32_t>(std::get<IntLit>(hi->node).v);
    }
    impl->var_index[info.name] = static_cast<std::uint32_t>(impl->vars.size());
    impl->vars.push_back(std::move(info));
  };
  for (const auto& v : m.globals) add_var(v);
  for (const auto& mod : m.modules)
    for (const auto& v : mod.locals) add_var(v);

  // bit-pack layout for the hash key
  int bits = 0;
  impl->shift.resize(impl->vars.size());
  for (std::size_t i = 0; i < impl->vars.size(); ++i) {
    impl->shift[i] = bits;
    std::uint64_t span = static_cast<std::uint64_t>(impl->vars[i].hi) - impl->vars[i].lo;
    int w = 1;
    while ((1ull << w) <= span) ++w;
    bits += w;
  }
  if (bits > 64)
    throw BuildError("state vector needs " + std::to_string(bits) +
                     " bits; packing supports at most 64");

  std::map<std::string, std::int32_t, std::less<>> label_ids;
  for (const auto& name : m.action_labels()) {
    label_ids[name] = static_cast<std::int32_t>(impl->labels.size());
    impl->labels.push_back(name);
  }

  Compiler comp{impl->var_index};
  std::vector<std::vector<std::vector<std::uint32_t>>> per_label_module(
      impl->labels.size(), std::vector<std::vector<std::uint32_t>>(m.modules.size()));
  for (std::size_t mi = 0; mi < m.modules.size(); ++mi) {
    for (const auto& c : m.modules[mi].commands) {
      CompiledCommand cc;
      cc.module = static_cast<int>(mi);
      cc.line = c.line;
      cc.label = c.label.empty() ? -1 : label_ids.at(c.label);
      cc.guard = comp.compile(*fold_constants(c.guard, consts, formulas));
      cc.has_rate = c.rate != nullptr;
      if (cc.has_rate) cc.rate = comp.compile(*fold_constants(c.rate, consts, formulas));
      for (const auto& u : c.updates) {
        auto vi = impl->var_index.find(u.target);
        if (vi == impl->var_index.end())
          throw BuildError("update target `" + u.target + "` is not a variable");
        cc.updates.push_back(
            {vi->second, comp.compile(*fold_constants(u.value, consts, formulas))});
      }
      auto idx = static_cast<std::uint32_t>(impl->commands.size());
      impl->commands.push_back(std::move(cc));
      if (impl->commands.back().label < 0) impl->unlabeled.push_back(idx);
      else per_label_module[impl->commands.back().label][mi].push_back(idx);
    }
  }
  for (std::size_t li = 0; li < impl->labels.size(); ++li) {
    SyncGroup g;
    g.label = static_cast<std::int32_t>(li);
    for (auto& cmds : per_label_module[li])
      if (!cmds.empty()) g.per_module.push_back(std::move(cmds));
    impl->sync.push_back(std::move(g));
  }

  for (const auto& r : m.rewards) {
    FoldedReward fr;
    fr.name = r.name;
    for (const auto& it : r.state_items) {
      FoldedRewardItem item;
      item.label = -2;
      item.guard = fold_constants(it.guard, consts, formulas);
      item.value = fold_constants(it.value, consts, formulas);
      item.cguard = comp.compile(*item.guard);
      item.cvalue = comp.compile(*item.value);
      fr.items.push_back(std::move(item));
    }
    for (const auto& it : r.trans_items) {
      FoldedRewardItem item;
      item.label = it.label.empty() ? -1 : label_ids.at(it.label);
      item.guard = fold_constants(it.guard, consts, formulas);
      item.value = fold_constants(it.value, consts, formulas);
      item.cguard = comp.compile(*item.guard);
      item.cvalue = comp.compile(*item.value);
      fr.items.push_back(std::move(item));
    }
    impl->rewards.push_back(std::move(fr));
  }
  return impl;
}

}  // namespace

StateSpace build(const ModelIR& m, const BuildOptions& opts) {
  auto impl = prepare(m);
  const std::size_t nv = impl->vars.size();

  std::vector<std::int32_t> init(nv);
  {
    std::size_t vi = 0;
    auto set_init = [&](const VarDecl& v) {
      ExprPtr e = fold_constants(v.init, impl->consts, impl->formulas);
      Value val = eval(*e, {});
      std::int32_t iv = val.is_bool() ? (val.as_bool() ? 1 : 0)
                                      : static_cast<std::int32_t>(val.as_int());
      if (iv < impl->vars[vi].lo || iv > impl->vars[vi].hi)
        throw BuildError("initial value of `" + v.name + "` outside its range");
      init[vi++] = iv;
    };
    for (const auto& v : m.globals) set_init(v);
    for (const auto& mod : m.modules)
      for (const auto& v : mod.locals) set_init(v);
  }

  impl->state_data.insert(impl->state_data.end(), init.begin(), init.end());
  impl->n = 1;
  impl->key_to_id.reserve(1 << 16);
  impl->key_to_id.emplace(impl->pack(init.data()), 0);

  std::vector<std::int32_t> dst(nv);
  std::vector<double> stack(64);
  struct Edge {
    std::uint32_t dst;
    std::int32_t label;
    double rate;
  };
  std::vector<Edge> out;
  out.reserve(64);

  for (std::uint32_t s = 0; s < impl->n; ++s) {
    // impl->state(s) pointer may dangle across state_data growth; copy.
    std::vector<std::int32_t> st(impl->state(s), impl->state(s) + nv);
    out.clear();
    impl->enumerate(st.data(), dst.data(), stack.data(),
                    [&](const CompiledCommand* const*, int, double rate, std::int32_t label) {
      std::uint64_t key = impl->pack(dst.data());
      auto [it, inserted] = impl->key_to_id.emplace(key, impl->n);
      if (inserted) {
        if (impl->n >= opts.max_states)
          throw BuildError("state count exceeds cap of " + std::to_string(opts.max_states));
        impl->state_data.insert(impl->state_data.end(), dst.begin(), dst.end());
        ++impl->n;
      }
      std::uint32_t d = it->second;
      for (auto& e : out) {
        if (e.dst == d && e.label == label) {
          e.rate += rate;
          return;
        }
      }
      out.push_back({d, label, rate});
    });
    impl->rows.push_back(static_cast<std::uint32_t>(impl->trans.size()));
    for (const auto& e : out) impl->trans.push_back({s, e.dst, e.label, e.rate});
  }
  impl->rows.push_back(static_cast<std::uint32_t>(impl->trans.size()));

  impl->exit.assign(impl->n, 0.0);
  for (const auto& t : impl->trans) impl->exit[t.src] += t.rate;

  StateSpace space;
  space.impl = std::move(impl);
  return space;
}

std::uint32_t StateSpace::num_states() const { return impl->n; }
std::uint32_t StateSpace::num_vars() const { return static_cast<std::uint32_t>(impl->vars.size()); }
std::uint32_t StateSpace::initial() const { return impl->init; }
const std::vector<VarInfo>& StateSpace::vars() const { return impl->vars; }
const std::int32_t* StateSpace::state(std::uint32_t idx) const { return impl->state(idx); }
const std::vector<std::string>& StateSpace::labels() const { return impl->labels; }
const std::vector<Transition>& StateSpace::transitions() const { return impl->trans; }
const std::uint32_t* StateSpace::row_begin() const { return impl->rows.data(); }
const std::vector<double>& StateSpace::exit_rates() const { return impl->exit; }

std::uint64_t StateSpace::matrix_nnz() const {
  std::uint64_t nnz = 0;
  for (std::uint32_t s = 0; s < impl->n; ++s) {
    std::set<std::uint32_t> dsts;
    for (auto i = impl->rows[s]; i < impl->rows[s + 1]; ++i) dsts.insert(impl->trans[i].dst);
    nnz += dsts.size();
  }
  return nnz;
}

std::vector<std::string> StateSpace::reward_names() const {
  std::vector<std::string> out;
  for (const auto& r : impl->rewards) out.push_back(r.name);
  return out;
}

namespace {

const FoldedReward& find_reward_or_throw(const StateSpace::Impl& impl, std::string_view name) {
  for (const auto& r : impl.rewards)
    if (r.name == name) return r;
  throw EvalError("unknown reward structure \"" + std::string(name) + "\"");
}

}  // namespace

std::vector<double> StateSpace::state_reward_vector(std::string_view name) const {
  const FoldedReward& r = find_reward_or_throw(*impl, name);
  std::vector<double> rho(impl->n, 0.0);
  std::vector<double> stack(64);
  for (std::uint32_t s = 0; s < impl->n; ++s) {
    const std::int32_t* st = impl->state(s);
    for (const auto& item : r.items) {
      if (item.label != -2) continue;
      if (item.cguard.run(st, stack.data()) != 0.0) rho[s] += item.cvalue.run(st, stack.data());
    }
  }
  return rho;
}

std::vector<double> StateSpace::reward_rate_vector(std::string_view name) const {
  const FoldedReward& r = find_reward_or_throw(*impl, name);
  std::vector<double> rho = state_reward_vector(name);
  bool any_trans = std::any_of(r.items.begin(), r.items.end(),
                               [](const FoldedRewardItem& i) { return i.label != -2; });
  if (!any_trans) return rho;

  std::vector<std::int32_t> dst(impl->vars.size());
  std::vector<double> stack(64);
  for (std::uint32_t s = 0; s < impl->n; ++s) {
    std::vector<std::int32_t> st(impl->state(s), impl->state(s) + impl->vars.size());
    impl->enumerate(st.data(), dst.data(), stack.data(),
                    [&](const CompiledCommand* const*, int, double rate, std::int32_t label) {
      for (const auto& item : r.items) {
        if (item.label == -2 || item.label != label) continue;
        if (item.cguard.run(st.data(), stack.data()) != 0.0)
          rho[s] += rate * item.cvalue.run(st.data(), stack.data());
      }
    });
  }
  return rho;
}

std::vector<double> StateSpace::transition_expected_impulse(std::string_view name) const {
  const FoldedReward& r = find_reward_or_throw(*impl, name);
  std::vector<double> weighted(impl->trans.size(), 0.0);
  std::vector<std::int32_t> dst(impl->vars.size());
  std::vector<double> stack(64);
  for (std::uint32_t s = 0; s < impl->n; ++s) {
    std::vector<std::int32_t> st(impl->state(s), impl->state(s) + impl->vars.size());
    impl->enumerate(st.data(), dst.data(), stack.data(),
                    [&](const CompiledCommand* const*, int, double rate, std::int32_t label) {
      double impulse = 0.0;
      for (const auto& item : r.items) {
        if (item.label == -2 || item.label != label) continue;
        if (item.cguard.run(st.data(), stack.data()) != 0.0)
          impulse += item.cvalue.run(st.data(), stack.data());
      }
      if (impulse == 0.0) return;
      std::uint32_t d = impl->key_to_id.at(impl->pack(dst.data()));
      for (auto i = impl->rows[s]; i < impl->rows[s + 1]; ++i) {
        if (impl->trans[i].dst == d && impl->trans[i].label == label) {
          weighted[i] += rate * impulse;
          break;
        }
      }
    });
  }
  for (std::size_t i = 0; i < weighted.size(); ++i)
    if (weighted[i] != 0.0) weighted[i] /= impl->trans[i].rate;
  return weighted;
}

std::vector<bool> StateSpace::satisfying(const ExprPtr& pred) const {
  ExprPtr folded = fold_constants(pred, impl->consts, impl->formulas);
  Compiler comp{impl->var_index};
  Prog p = comp.compile(*folded);
  std::vector<double> stack(std::max(p.max_stack + 8, 64));
  std::vector<bool> out(impl->n);
  for (std::uint32_t s = 0; s < impl->n; ++s)
    out[s] = p.run(impl->state(s), stack.data()) != 0.0;
  return out;
}

void StateSpace::export_states(std::ostream& os) const {
  for (std::uint32_t s = 0; s < impl->n; ++s) {
    os << s;
    const std::int32_t* st = impl->state(s);
    for (std::size_t i = 0; i < impl->vars.size(); ++i) {
      os << ' ' << impl->vars[i].name << '=';
      if (impl->vars[i].is_bool) os << (st[i] ? "true" : "false");
      else os << st[i];
    }
    os << '\n';
  }
}

void StateSpace::export_transitions(std::ostream& os) const {
  for (const auto& t : impl->trans) {
    os << t.src << ' ' << t.dst << ' ' << to_string(Value(t.rate));
    if (t.label >= 0) os << ' ' << impl->labels[t.label];
    os << '\n';
  }
}

std::vector<double> exit_rates(const StateSpace& space) { return space.exit_rates(); }

std::vector<double> reward_rate_vector(const StateSpace& space, std::string_view name) {
  return space.reward_rate_vector(name);
}

}  // namespace gridmc
