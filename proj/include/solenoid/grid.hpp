#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "solenoid/io.hpp"

namespace solenoid {

/// Piecewise-constant density on the cylinder slab S^1 x [ylo, yhi],
/// cell-centered, row-major with index ix*ny + iy.
struct DensityField {
    int nx = 0, ny = 0;
    double ylo = -1.0, yhi = 1.0;
    std::vector<double> v;

    DensityField() = default;
    DensityField(int nx_, int ny_, double ylo_, double yhi_)
        : nx(nx_), ny(ny_), ylo(ylo_), yhi(yhi_),
          v(static_cast<std::size_t>(nx_) * ny_, 0.0) {
        if (nx_ < 1 || ny_ < 1) throw std::invalid_argument("DensityField: empty grid");
        if (!(yhi_ > ylo_)) throw std::invalid_argument("DensityField: empty y-range");
    }

    double dx() const { return 1.0 / nx; }
    double dy() const { return (yhi - ylo) / ny; }
    double cell_area() const { return dx() * dy(); }

    double x_center(int ix) const { return (ix + 0.5) / nx; }
    double y_center(int iy) const { return ylo + (iy + 0.5) * dy(); }

    double& at(int ix, int iy) { return v[static_cast<std::size_t>(ix) * ny + iy]; }
    double at(int ix, int iy) const { return v[static_cast<std::size_t>(ix) * ny + iy]; }

    double integral() const {
        double acc = 0.0;
        for (double x : v) acc += x;
        return acc * cell_area();
    }

    void scale(double a) {
        for (double& x : v) x *= a;
    }

    void normalize() {
        double m = integral();
        if (m <= 0.0) throw std::runtime_error("normalize: nonpositive mass");
        scale(1.0 / m);
    }

    double l1_distance(const DensityField& o) const {
        if (o.nx != nx || o.ny != ny) throw std::invalid_argument("l1_distance: grid mismatch");
        double acc = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) acc += std::abs(v[i] - o.v[i]);
        return acc * cell_area();
    }

    /// Bilinear sample (cell centers as nodes, clamped in y, wrapped in x).
    double sample(double x, double y) const {
        double gx = wrapx(x) * nx - 0.5;
        int ix0 = static_cast<int>(std::floor(gx));
        double fx = gx - ix0;
        int ixa = (ix0 % nx + nx) % nx;
        int ixb = (ixa + 1) % nx;

        double gy = (y - ylo) / dy() - 0.5;
        if (gy < 0.0) gy = 0.0;
        if (gy > ny - 1.0) gy = ny - 1.0;
        int iy0 = static_cast<int>(std::floor(gy));
        if (iy0 > ny - 2) iy0 = ny - 2;
        if (iy0 < 0) iy0 = 0;
        double fy = gy - iy0;

        return (1 - fx) * ((1 - fy) * at(ixa, iy0) + fy * at(ixa, iy0 + 1)) +
               fx * ((1 - fy) * at(ixb, iy0) + fy * at(ixb, iy0 + 1));
    }

    std::string to_csv(int digits = 12) const {
        std::string out = "x,y,value\n";
        for (int ix = 0; ix < nx; ++ix)
            for (int iy = 0; iy < ny; ++iy)
                out += fmt_double(x_center(ix), digits) + "," + fmt_double(y_center(iy), digits) +
                       "," + fmt_double(at(ix, iy), digits) + "\n";
        return out;
    }

    std::string to_pgm16() const {
        // pgm16_encode expects column-major-by-x which matches our layout.
        return pgm16_encode(nx, ny, v);
    }

  private:
    static double wrapx(double x) {
        double y = x - std::floor(x);
        return y < 1.0 ? y : 0.0;
    }
};

}  // namespace solenoid
