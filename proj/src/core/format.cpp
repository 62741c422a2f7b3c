#include "core/format.hpp"

#include <charconv>
#include <cstdio>

namespace elrdyn {

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void write_trajectory_csv(const Trajectory& trajectory, std::ostream& out) {
    out << "step,lambda,kappa_crit,kappa_sub,s_rel,flip";
    for (std::size_t i = 1; i <= trajectory.num_layers; ++i) {
        out << ",sigma_sq_" << i << ",gradnorm_" << i << ",elr_" << i;
    }
    out << '\n';
    for (const auto& row : trajectory.rows) {
        out << row.step << ',' << format_double(row.lambda) << ','
            << format_double(row.kappa_crit) << ',' << format_double(row.kappa_sub) << ','
            << format_double(row.s_rel) << ',' << row.flips;
        for (std::size_t i = 0; i < trajectory.num_layers; ++i) {
            out << ',' << format_double(row.sigma_sq[i]) << ',' << format_double(row.grad_norm[i])
                << ',' << format_double(row.elr[i]);
        }
        out << '\n';
    }
}

void write_ensemble_csv(const McResult& result, std::ostream& out) {
    out << "step,layer,mean_wnorm_sq,std_wnorm_sq,mean_gnorm_sq,std_gnorm_sq,mean_elr,std_elr\n";
    for (const auto& row : result.rows) {
        for (std::size_t l = 0; l < row.layers.size(); ++l) {
            const EnsembleCell& cell = row.layers[l];
            out << row.step << ',' << (l + 1) << ',' << format_double(cell.mean_wnorm_sq) << ','
                << format_double(cell.std_wnorm_sq) << ',' << format_double(cell.mean_gnorm_sq)
                << ',' << format_double(cell.std_gnorm_sq) << ',' << format_double(cell.mean_elr)
                << ',' << format_double(cell.std_elr) << '\n';
        }
    }
}

}  // namespace elrdyn
