#pragma once

#include "hdtomo/tomography.hpp"

namespace hdt {

struct QualityReport {
  double fidelity = 0.0;
  /// W at the grid point nearest the origin.
  double depth = 0.0;
  double min_value = 0.0;
  double min_q = 0.0;
  double min_p = 0.0;
  double epsilon_r_used = 0.0;
};

/// Closed-form overlap of an ideal squeezed vacuum with its reconstruction
/// after effective loss epsilon_r.
double fidelity_bsv(double r1, double epsilon_r);

/// 2 pi * sum(W_ideal W_recon) dq dp. Meaningful when w_ideal is pure.
/// Throws RangeError when the axes differ.
double fidelity_numeric(const WignerGrid& w_ideal, const WignerGrid& w_recon);

/// Reconstructed squeezed-single-photon Wigner function at the origin.
double wigner_depth(double r1, double epsilon_r);

struct GridMinimum {
  double value;
  double q;
  double p;
};

/// Smallest grid value; ties resolve to the first in row-major order.
GridMinimum scan_minimum(const WignerGrid& w);

QualityReport quality_report(const WignerGrid& w_ideal, const WignerGrid& w_recon,
                             double epsilon_r);

}  // namespace hdt
