#pragma once

#include <ostream>
#include <string>

#include "core/simulate.hpp"
#include "core/stochastic.hpp"

namespace elrdyn {

// Shortest decimal string that round-trips the double (std::to_chars);
// "nan"/"inf" for non-finite values. This is the one numeric format used in
// every CSV, so identical values always print identically.
std::string format_double(double v);

// Header: step,lambda,kappa_crit,kappa_sub,s_rel,flip followed by
// sigma_sq_<i>,gradnorm_<i>,elr_<i> per layer, i = 1..L.
void write_trajectory_csv(const Trajectory& trajectory, std::ostream& out);

// Long format, one row per (recorded step, layer):
// step,layer,mean_wnorm_sq,std_wnorm_sq,mean_gnorm_sq,std_gnorm_sq,mean_elr,std_elr
void write_ensemble_csv(const McResult& result, std::ostream& out);

}  // namespace elrdyn
