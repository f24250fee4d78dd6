#pragma once

// CSV writers. All numbers are printed with 17 significant digits.

#include <ostream>
#include <string>

#include "liebridge/bridge.hpp"
#include "liebridge/integrator.hpp"

namespace liebridge {

/// 17 significant digits.
std::string format_number(double x);

/// Header t,r00,r01,r02,r10,r11,r12,r20,r21,r22; one row per grid point.
void write_path_csv(std::ostream& out, const SamplePath& path);

/// Header t,e1x,e1y,e1z,e2x,e2y,e2z,e3x,e3y,e3z: images of the canonical basis vectors.
void write_frames_csv(std::ostream& out, const SamplePath& path);

/// Path columns plus r,log_phi_cum.
void write_bridge_csv(std::ostream& out, const BridgeSample& sample);

}  // namespace liebridge
