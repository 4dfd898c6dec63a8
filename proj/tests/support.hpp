#pragma once

// Shared fixtures for the unit tests.

#include "surftrap/geometry.hpp"
#include "surftrap/trap_model.hpp"

#include <random>
#include <vector>

namespace testing_support {

using namespace surftrap;

inline PolygonElectrode rectangle(std::string name, double x0, double x1, double z0, double z1,
                                  ElectrodeKind kind = ElectrodeKind::dc) {
    return {std::move(name), kind, {{x0, z0}, {x1, z0}, {x1, z1}, {x0, z1}}};
}

/// Published linear-transition layout, built once per test binary.
inline const TrapLayout& published_linear() {
    static const TrapLayout layout = build_layout(LayoutParams::published(), LinearTransition{});
    return layout;
}

inline const TrapModel& published_model() {
    static const TrapModel model(published_linear(), Drive::published(), IonSpecies::calcium40());
    return model;
}

/// Layout with straight rails only (no transition zones in the modelled range).
inline TrapLayout straight_rails(double half_length = 3000.0) {
    LayoutParams p = LayoutParams::published();
    p.gamma = 20000.0;
    p.extent_z = half_length;
    // gamma beyond extent: build the rails directly.
    TrapLayout layout;
    layout.params = p;
    const double x1 = 0.5 * p.c, x2 = x1 + p.b, x3 = x2 + p.a, x4 = x3 + p.b, x5 = x4 + p.d;
    const double L = half_length;
    layout.electrodes.push_back(rectangle("RF_C", -x1, x1, -L, L, ElectrodeKind::rf));
    layout.electrodes.push_back(rectangle("RF_MR", x2, x3, -L, L, ElectrodeKind::rf));
    layout.electrodes.push_back(rectangle("RF_ML", -x3, -x2, -L, L, ElectrodeKind::rf));
    layout.electrodes.push_back(rectangle("RF_OR", x4, x5, -L, L, ElectrodeKind::rf));
    layout.electrodes.push_back(rectangle("RF_OL", -x5, -x4, -L, L, ElectrodeKind::rf));
    return layout;
}

inline std::vector<Point3> random_points(std::size_t n, unsigned seed, double xr = 200.0, double y0 = 20.0,
                                         double y1 = 200.0, double zr = 200.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ux(-xr, xr), uy(y0, y1), uz(-zr, zr);
    std::vector<Point3> pts;
    for (std::size_t i = 0; i < n; ++i) pts.push_back({ux(rng), uy(rng), uz(rng)});
    return pts;
}

}  // namespace testing_support
