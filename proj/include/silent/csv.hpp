#pragma once

#include "silent/domain_model.hpp"
#include "silent/model.hpp"
#include "silent/trainer.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace silent {

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

std::vector<std::string> split_csv_line(const std::string& line);

/// Header `y,x_0,...,x_{p-1}` plus `zd_*,zs_*` when latents are requested.
void write_dataset_csv(std::ostream& out, const Data& data, bool include_latents);

/// Header `iter,phase,train_loss,val_loss,swad_active`.
void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& trace);

// Checkpoint text format:
//   silentlab-model/1
//   dims <p_d> <p_s>
//   featurizer            followed by p rows of p values
//   head_d <p_d values>
//   head_s <p_s values>
//   bias <value>
void write_model(std::ostream& out, const TwoStageModel& model);
TwoStageModel read_model(std::istream& in);

}  // namespace silent
