#include "gridmc/generators.hpp"

#include <charconv>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "gridmc/parser.hpp"

namespace gridmc {

namespace {

std::string num(double v) {
  char buf[40];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, p);
}

// `const int` when the value is integral, `const double` otherwise
void emit_const(std::ostringstream& os, const std::string& name, double v,
                const std::string& comment = "") {
  bool integral = v == std::floor(v) && std::fabs(v) < 1e15;
  os << "const " << (integral ? "int " : "double ") << name << "=";
  if (integral) os << static_cast<long long>(v);
  else os << num(v);
  os << ";";
  if (!comment.empty()) os << " // " << comment;
  os << "\n";
}

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

void GridParams::check() const {
  require(size_bn >= 1 && size_sn >= 1, "node counts must be >= 1");
  require(max_bn_fail >= 1 && max_sn_fail >= 1, "failure caps must be >= 1");
  require(max_bn_fail <= size_bn, "MAX_BN_FAIL must not exceed SIZE_BN");
  require(static_cast<long long>(max_sn_fail) <=
              static_cast<long long>(size_sn) * size_bn,
          "MAX_SN_FAIL must not exceed SIZE_SN*SIZE_BN");
  require(sleeptime > 0 && mtbf_sn > 0 && mtbf_bn > 0 && recoverytime_sn > 0 &&
              recoverytime_bn > 0 && processtime > 0,
          "durations must be positive");
  require(p_cheaplink >= 0 && p_cheaplink <= 1, "pCHEAPLINK must be in [0,1]");
}

std::string build_compact(const GridParams& p) {
  p.check();
  std::ostringstream os;
  os << "// Compact model: SIZE_BN towers, SIZE_SN sensors per tower.\n"
        "// time unit: 1 hour\n\nctmc\n\n// 1. Number of nodes\n";
  emit_const(os, "SIZE_BN", p.size_bn, "Number of bone nodes");
  emit_const(os, "MAX_BN_FAIL", p.max_bn_fail, "MAX number of bone node failures that can be tolerated");
  emit_const(os, "SIZE_SN", p.size_sn, "Number of sensor nodes in each tower");
  emit_const(os, "MAX_SN_FAIL", p.max_sn_fail, "MAX number of sensor node failures that can be tolerated");
  os << "// 2. Durations\n";
  emit_const(os, "SLEEPTIME", p.sleeptime, "Average sleeping duration for each node (hours)");
  emit_const(os, "MEANTIMEBETWEENFAILURE_SN", p.mtbf_sn, "Average lifetime without failure per sensor node");
  emit_const(os, "MEANTIMEBETWEENFAILURE_BN", p.mtbf_bn, "Average lifetime without failure per bone node");
  emit_const(os, "RECOVERYTIME_SN", p.recoverytime_sn, "Average recovery time for sensor nodes");
  emit_const(os, "RECOVERYTIME_BN", p.recoverytime_bn, "Average recovery time for bone nodes");
  emit_const(os, "PROCESSTIME", p.processtime, "Average processing duration");
  os << "// 3. Probabilities\n";
  emit_const(os, "pCHEAPLINK", p.p_cheaplink, "Probability of using the inexpensive transmission links");
  os << "// 4. Costs\n";
  emit_const(os, "cCHEAPTX", p.c_cheaptx, "Cost of comm. over an inexpensive transmission link");
  emit_const(os, "cEXPENSIVETX", p.c_expensivetx, "Cost of comm. over an expensive transmission link");
  emit_const(os, "cSNTX", p.c_sntx, "Cost of intra-tower comm. for a sensor node");
  emit_const(os, "cSLEEP_BN", p.c_sleep_bn, "Cost of sleep for a bone node");
  emit_const(os, "cSLEEP_SN", p.c_sleep_sn, "Cost of sleep for a sensor node");
  emit_const(os, "cPROCESS_BN", p.c_process_bn, "Cost of processing for a bone node");
  emit_const(os, "cPROCESS_SN", p.c_process_sn, "Cost of processing for a sensor node");
  os << R"(
const double rSLEEP=1/SLEEPTIME;
const double rFAIL_SN=1/MEANTIMEBETWEENFAILURE_SN;
const double rFAIL_BN=1/MEANTIMEBETWEENFAILURE_BN;
const double rRECOVERY_SN=1/RECOVERYTIME_SN;
const double rRECOVERY_BN=1/RECOVERYTIME_BN;
const double rPROCESS=1/PROCESSTIME;

formula osnf = 1-(0.01*(failedSN/(SIZE_SN*SIZE_BN))); // Operational Sensor Node Factor
formula obnf = 1-(0.01*(failedBN/SIZE_BN)); // Operational Bone Node Factor

// Node duty cycle: 1 = sleep, 2 = process
module controller
mode : [1..2] init 1;
[wakeup] mode=1 & failedBN<MAX_BN_FAIL & failedSN<MAX_SN_FAIL -> rSLEEP: (mode'=2);
[process] mode=2 & failedBN<MAX_BN_FAIL & failedSN<MAX_SN_FAIL -> rPROCESS: (mode'=1);
endmodule

module sensorNodes
failedSN : [0..MAX_SN_FAIL] init 0; // Number of failed sensors in this group
[failSN] failedSN<MAX_SN_FAIL -> osnf*rFAIL_SN: (failedSN'=failedSN+1);
[repairSN] failedSN>0 -> rRECOVERY_SN: (failedSN'=failedSN-1);
endmodule

module boneNodes
failedBN : [0..MAX_BN_FAIL] init 0; // Number of failed bone nodes in this group
[failBN] failedBN<MAX_BN_FAIL -> obnf*rFAIL_BN: (failedBN'=failedBN+1);
[repairBN] failedBN>0 -> rRECOVERY_BN: (failedBN'=failedBN-1);
endmodule

// Repair service; bone nodes have higher priority
module repairService
[repairBN] failedBN>0 -> true;
[repairSN] failedSN>0 & failedBN=0 -> true;
endmodule

rewards "AvgEnergyBN"
[wakeup] true : pCHEAPLINK*cCHEAPTX + (1-pCHEAPLINK)*cEXPENSIVETX;
mode=1 : cSLEEP_BN;
mode=2 : cPROCESS_BN;
endrewards

rewards "AvgEnergySN"
[wakeup] true : cSNTX;
mode=1 : cSLEEP_SN;
mode=2 : cPROCESS_SN;
endrewards
)";
  return os.str();
}

void TowerParams::check() const {
  require(n_sensors >= 1 && n_sensors <= 36, "feasible sensor count is 1..36");
  require(r_fail > 0 && r_recover > 0 && r_send > 0, "rates must be positive");
  require(max_failure_tracked >= 1, "failcount range must be >= 1");
}

std::string build_tower(const TowerParams& p) {
  p.check();
  const int n = p.n_sensors;
  std::ostringstream os;
  os << "// Electricity tower: one bone node, " << n
     << " sensors in a star topology.\n// time unit: 1 hour\n\nctmc\n\n";
  os << "const double rFail=" << num(p.r_fail) << "; // Failure rate per sensor\n";
  os << "const double rRecover=" << num(p.r_recover) << "; // Recovery rate per sensor\n";
  os << "const double rSend=" << num(p.r_send) << "; // Packet rate per sensor\n";
  emit_const(os, "cSend", p.c_send, "Cost of Send");
  emit_const(os, "MAXfailure", p.max_failure_tracked, "failcount range");
  os << "\nmodule failcount\nfailure : [0..MAXfailure] init 0;\n";
  for (int i = 1; i <= n; ++i)
    os << "[fail" << i << "] failure<MAXfailure -> (failure'=failure+1);\n";
  for (int i = 1; i <= n; ++i)
    os << "[rec" << i << "] failure>0 -> (failure'=failure-1);\n";
  os << "endmodule\n\nmodule tower\n";
  for (int i = 1; i <= n; ++i) os << "s" << i << " : bool init true;\n";
  os << "// A sensor fails\n";
  for (int i = 1; i <= n; ++i)
    os << "[fail" << i << "] s" << i << " -> rFail: (s" << i << "'=false);\n";
  os << "// A failed sensor is recovered\n";
  for (int i = 1; i <= n; ++i)
    os << "[rec" << i << "] !s" << i << " -> rRecover: (s" << i << "'=true);\n";
  os << "// A sensor sends a packet\n";
  for (int i = 1; i <= n; ++i) os << "[send" << i << "] s" << i << " -> rSend: true;\n";
  os << "endmodule\n\n";
  os << "rewards \"Doublefailure\"\nfailure=2 : 1;\nendrewards\n\n";
  os << "rewards \"Singlefailure\"\nfailure=1 : 1;\nendrewards\n\n";
  os << "rewards \"TotalNumberOfCommunicationsToBN\"\n";
  for (int i = 1; i <= n; ++i) os << "[send" << i << "] true : 1;\n";
  os << "endrewards\n\nrewards \"TotalNumberOfSensorsFailures\"\n";
  for (int i = 1; i <= n; ++i) os << "[fail" << i << "] true : 1;\n";
  os << "endrewards\n\nrewards \"TotalNumberOfRecoveries\"\n";
  for (int i = 1; i <= n; ++i) os << "[rec" << i << "] true : 1;\n";
  os << "endrewards\n\n// Energy consumption of each sensor\n";
  for (int i = 1; i <= n; ++i)
    os << "rewards \"s" << i << "\"\n[send" << i << "] true : cSend;\nendrewards\n";
  return os.str();
}

void LineParams::check() const {
  require(n_towers >= 3 && n_towers <= 12, "explicit-state line supports 3..12 towers");
  require(t_sleep > 0 && t_operation > 0 && t_life > 0 && t_recovery > 0 && t_tx > 0,
          "durations must be positive");
  require(max_failures_encoded >= 0, "max_failures_encoded must be >= 0");
}

namespace {

struct TxCommand {
  std::string label;
  int from, to;
  bool backup;
  std::set<int> cond;       // towers that must be down
  std::string sender_guard;  // reused by the reward items
  std::string recv_guard;
};

std::string down_conds(const std::set<int>& cond) {
  std::string out;
  for (int c : cond) {
    out += " & (state" + std::to_string(c) + "=0 | state" + std::to_string(c) + "=2)";
  }
  return out;
}

}  // namespace

std::string build_line(const LineParams& p) {
  p.check();
  const int n = p.n_towers;
  LineTopology topo(n);
  LinkRuleSet rules = derive_link_rules(topo, p.max_failures_encoded);

  // flatten to one synchronized command per (link, minimal condition)
  std::vector<TxCommand> txs;
  for (const auto& [tower, ruleset] : rules.send) {
    for (const auto& rule : ruleset) {
      char suffix = 'a';
      for (const auto& cond : rule.conditions) {
        TxCommand tx;
        tx.from = rule.from;
        tx.to = rule.to;
        tx.backup = rule.cls == LinkClass::Expensive;
        tx.cond = cond;
        tx.label = "TX" + std::to_string(rule.from) + "_" + std::to_string(rule.to);
        if (rule.conditions.size() > 1) tx.label += suffix++;
        tx.sender_guard = "state" + std::to_string(tx.from) + "=1" + down_conds(cond);
        std::string r = std::to_string(tx.to);
        tx.recv_guard = topo.is_terminal(tx.to)
                            ? "state" + r + "=1"
                            : "(state" + r + "=1 | state" + r + "=3)";
        tx.recv_guard += down_conds(cond);
        txs.push_back(std::move(tx));
      }
    }
  }

  std::ostringstream os;
  os << "// Transmission line of " << n << " towers; terminals " << 1 << " and " << n
     << " only receive.\n// Routing rules derived for up to " << p.max_failures_encoded
     << " simultaneous failures.\n// time unit: 1 hour\n\nctmc\n\n";
  emit_const(os, "tSLEEP", p.t_sleep, "Duration of SLEEP in hours");
  emit_const(os, "tOPERATION", p.t_operation, "Duration of OPERATION in hours");
  emit_const(os, "tLIFE", p.t_life, "Average lifetime of a bone node (hours)");
  emit_const(os, "tRECOVERY", p.t_recovery, "Average recovery time of a bone node (hours)");
  emit_const(os, "tTX", p.t_tx, "Average transmission time (milliseconds)");
  emit_const(os, "cTX10", p.c_tx10, "Battery consumption in TX 10dBm mode");
  emit_const(os, "cTX20", p.c_tx20, "Battery consumption in TX 20dBm mode");
  emit_const(os, "cRX", p.c_rx, "Battery consumption in RX mode");
  emit_const(os, "cSleep", p.c_sleep, "Battery consumption in Sleep mode");
  os << "\nglobal brokendevices : [0.." << n << "] init 0;\n\n";
  os << "const double rSLEEP=1/tSLEEP;\n";
  os << "const double rOPERATION=1/tOPERATION;\n";
  os << "const double rFAIL=1/tLIFE;\n";
  os << "const double rRECOVERY=1/tRECOVERY;\n";
  os << "const double rTX=tTX*1000*60*60; // transmissions resolve fast against the duty cycle\n";

  os << "\nmodule environment\nsleeping : bool init true;\n\n";
  os << "[wakeup] sleeping -> rSLEEP: (sleeping'=false);\n\n";
  os << "// all sending nodes are done\n[sleep] !sleeping";
  for (int t = 2; t < n; ++t) os << "\n  & (state" << t << "!=1)";
  os << "\n  -> rOPERATION: (sleeping'=true);\n\n// transmission rates\n";
  for (const auto& tx : txs) os << "[" << tx.label << "] true -> rTX: true;\n";
  os << "endmodule\n";

  for (int t = 1; t <= n; ++t) {
    bool terminal = topo.is_terminal(t);
    os << "\nmodule tower" << t << "\n";
    os << "state" << t << " : [0.." << (terminal ? 2 : 3) << "] init 2; // 0 broken, 1 operational, 2 sleeping"
       << (terminal ? "" : ", 3 done") << "\n\n";
    os << "[wakeup] state" << t << "=2 -> (state" << t << "'=1);\n";
    os << "[wakeup] state" << t << "=0 -> true;\n\n";
    for (const auto& tx : txs)
      if (tx.to == t) os << "[" << tx.label << "] " << tx.recv_guard << " -> true;\n";
    if (!terminal) {
      os << "\n";
      for (const auto& tx : txs)
        if (tx.from == t)
          os << "[" << tx.label << "] " << tx.sender_guard << " -> (state" << t << "'=3);\n";
    }
    os << "\n[sleep] state" << t << "=" << (terminal ? 1 : 3) << " -> (state" << t << "'=2);\n";
    os << "[sleep] state" << t << "=0 | state" << t << "=2 -> true;\n\n";
    os << "[] state" << t << ">0 & brokendevices<" << n << " -> rFAIL: (state" << t
       << "'=0) & (brokendevices'=brokendevices+1);\n";
    os << "[] state" << t << "=0 & brokendevices>0 -> rRECOVERY: (state" << t
       << "'=2) & (brokendevices'=brokendevices-1);\n";
    os << "endmodule\n";
  }

  os << "\n// usage of backup links\n";
  for (int i = 1; i + 2 <= n; ++i) {
    bool any = false;
    for (const auto& tx : txs)
      if (tx.backup && std::min(tx.from, tx.to) == i) any = true;
    if (!any) continue;
    os << "rewards \"backup" << i << i + 2 << "\"\n";
    for (const auto& tx : txs)
      if (tx.backup && std::min(tx.from, tx.to) == i)
        os << "[" << tx.label << "] " << tx.sender_guard << " : 1;\n";
    os << "endrewards\n";
  }

  os << "\n// battery consumption\n";
  for (int t = 1; t <= n; ++t) {
    os << "rewards \"battery" << t << "\"\n";
    os << "[] state" << t << "=2 : cSleep;\n";
    for (const auto& tx : txs)
      if (tx.from == t)
        os << "[" << tx.label << "] " << tx.sender_guard << " : " << (tx.backup ? "cTX20" : "cTX10")
           << ";\n";
    for (const auto& tx : txs)
      if (tx.to == t) os << "[" << tx.label << "] " << tx.recv_guard << " : cRX;\n";
    os << "endrewards\n";
  }

  os << "\n// received packets per tower\n";
  for (int t = 1; t <= n; ++t) {
    bool any = false;
    for (const auto& tx : txs)
      if (tx.to == t) any = true;
    if (!any) continue;
    os << "rewards \"receivedpacketsT" << t << "\"\n";
    for (const auto& tx : txs)
      if (tx.to == t) os << "[" << tx.label << "] " << tx.recv_guard << " : 1;\n";
    os << "endrewards\n";
  }

  os << "\n// sent packets per tower\n";
  for (int t = 2; t < n; ++t) {
    os << "rewards \"sentpacketsT" << t << "\"\n";
    for (const auto& tx : txs)
      if (tx.from == t) os << "[" << tx.label << "] " << tx.sender_guard << " : 1;\n";
    os << "endrewards\n";
  }

  os << "\n// failure durations\n";
  for (int t = 1; t <= n; ++t)
    os << "rewards \"fail" << t << "\"\nstate" << t << "=0 : 1;\nendrewards\n";

  return os.str();
}

ModelIR build_compact_model(const GridParams& p) { return parse_model(build_compact(p)); }
ModelIR build_tower_model(const TowerParams& p) { return parse_model(build_tower(p)); }
ModelIR build_line_model(const LineParams& p) { return parse_model(build_line(p)); }

}  // namespace gridmc
