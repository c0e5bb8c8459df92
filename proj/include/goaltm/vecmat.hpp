#pragma once

#include <cstddef>
#include <vector>

namespace goaltm {

using Vec = std::vector<double>;

// Dense row-major matrix. Small helper, nothing clever: every matrix in this
// project is at most a few thousand entries.
struct Mat {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Mat() = default;
    Mat(int r, int c, double fill = 0.0) : rows(r), cols(c), data(static_cast<size_t>(r) * c, fill) {}

    double& at(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
    double at(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }

    double* row(int r) { return data.data() + static_cast<size_t>(r) * cols; }
    const double* row(int r) const { return data.data() + static_cast<size_t>(r) * cols; }

    Vec row_vec(int r) const {
        const double* p = row(r);
        return Vec(p, p + cols);
    }

    void set_row(int r, const Vec& v) {
        for (int c = 0; c < cols; ++c) at(r, c) = v[static_cast<size_t>(c)];
    }

    bool operator==(const Mat& o) const { return rows == o.rows && cols == o.cols && data == o.data; }
};

double dot(const Vec& a, const Vec& b);
double norm2(const Vec& a);
double squared_distance(const Vec& a, const Vec& b);
Vec scaled(const Vec& a, double s);
void axpy(Vec& y, double a, const Vec& x); // y += a*x

} // namespace goaltm
