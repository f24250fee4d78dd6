#include "liebridge/path_io.hpp"

#include <cstdio>

namespace liebridge {

std::string format_number(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace {

void write_matrix_row(std::ostream& out, double t, const Mat3& m) {
    out << format_number(t);
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            out << ',' << format_number(m(i, j));
        }
    }
}

}  // namespace

void write_path_csv(std::ostream& out, const SamplePath& path) {
    out << "t,r00,r01,r02,r10,r11,r12,r20,r21,r22\n";
    for (std::size_t i = 0; i < path.states.size(); ++i) {
        write_matrix_row(out, path.grid.t[i], path.states[i].matrix());
        out << '\n';
    }
}

void write_frames_csv(std::ostream& out, const SamplePath& path) {
    out << "t,e1x,e1y,e1z,e2x,e2y,e2z,e3x,e3y,e3z\n";
    for (std::size_t i = 0; i < path.states.size(); ++i) {
        const Mat3& m = path.states[i].matrix();
        out << format_number(path.grid.t[i]);
        for (int c = 0; c < 3; ++c) {
            for (int r = 0; r < 3; ++r) {
                out << ',' << format_number(m(r, c));
            }
        }
        out << '\n';
    }
}

void write_bridge_csv(std::ostream& out, const BridgeSample& sample) {
    out << "t,r00,r01,r02,r10,r11,r12,r20,r21,r22,r,log_phi_cum\n";
    const auto& path = sample.path;
    for (std::size_t i = 0; i < path.states.size(); ++i) {
        write_matrix_row(out, path.grid.t[i], path.states[i].matrix());
        out << ',' << format_number(sample.radial[i]) << ',' << format_number(sample.log_phi_cum[i]) << '\n';
    }
}

}  // namespace liebridge
