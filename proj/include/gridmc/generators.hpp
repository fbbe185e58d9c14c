#pragma once

#include <string>

#include "gridmc/model.hpp"
#include "gridmc/routing.hpp"

namespace gridmc {

// Whole-system compact model inputs (counts, durations in hours,
// probabilities, energy costs).
struct GridParams {
  int size_bn = 100;
  int max_bn_fail = 5;
  int size_sn = 50;
  int max_sn_fail = 50;
  double sleeptime = 1;
  double mtbf_sn = 24000;
  double mtbf_bn = 36000;
  double recoverytime_sn = 48;
  double recoverytime_bn = 36;
  double processtime = 0.001;
  double p_cheaplink = 0.95;
  double c_cheaptx = 24;
  double c_expensivetx = 40;
  double c_sntx = 8;
  double c_sleep_bn = 0.001;
  double c_sleep_sn = 0.001;
  double c_process_bn = 5;
  double c_process_sn = 2;

  void check() const;  // throws std::invalid_argument
};

// Single-tower sensor model inputs (rates per hour).
struct TowerParams {
  int n_sensors = 10;
  double r_fail = 1e-6;
  double r_recover = 0.01;
  double r_send = 1;
  double c_send = 1;
  int max_failure_tracked = 10;

  void check() const;
};

// Transmission-line model inputs (durations in hours except t_tx, energy
// costs per the corpus conventions).
struct LineParams {
  int n_towers = 10;
  double t_sleep = 1;
  double t_operation = 0.01;
  double t_life = 10000;
  double t_recovery = 50;
  double t_tx = 5;  // milliseconds
  double c_tx10 = 120;
  double c_tx20 = 200;
  double c_rx = 18;
  double c_sleep = 0.005;
  int max_failures_encoded = 2;

  void check() const;
};

// Each builder emits model text in the parser's language, so generated
// models round-trip through parse_model.
std::string build_compact(const GridParams& p = {});
std::string build_tower(const TowerParams& p = {});
std::string build_line(const LineParams& p = {});

ModelIR build_compact_model(const GridParams& p = {});
ModelIR build_tower_model(const TowerParams& p = {});
ModelIR build_line_model(const LineParams& p = {});

}  // namespace gridmc
