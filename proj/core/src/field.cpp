#include "vortexlab/field.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "vortexlab/errors.hpp"
#include "vortexlab/rng.hpp"
#include "vortexlab/textio.hpp"

namespace vlab {

void VorticityField::validate() const {
    if (n <= 0 || (n & (n - 1)) != 0)
        throw SimError("field grid must be a positive power of two, got n=" +
                       std::to_string(n));
    if (!(box_length > 0.0)) throw SimError("box_length must be > 0");
    if (values.size() != std::size_t(n) * n)
        throw SimError("field value count does not match n*n");
    for (double v : values)
        if (!std::isfinite(v)) throw NonFiniteError("field holds a non-finite value");
}

double VorticityField::integral() const {
    double s = 0.0;
    for (double v : values) s += v;
    return s * h() * h();
}

double VorticityField::abs_integral() const {
    double s = 0.0;
    for (double v : values) s += std::abs(v);
    return s * h() * h();
}

void save_field(const VorticityField& f, double nu, const std::string& path) {
    {
        std::ofstream bin(path + ".bin", std::ios::binary);
        if (!bin) throw SimError("cannot write " + path + ".bin");
        bin.write(reinterpret_cast<const char*>(f.values.data()),
                  std::streamsize(f.values.size() * sizeof(double)));
    }
    nlohmann::json meta;
    meta["n"] = f.n;
    meta["box_length"] = f.box_length;
    meta["time"] = f.time;
    meta["nu"] = nu;
    std::ofstream js(path + ".json");
    if (!js) throw SimError("cannot write " + path + ".json");
    js << meta.dump() << "\n";
}

VorticityField load_field(const std::string& path, double* nu_out) {
    std::ifstream js(path + ".json");
    if (!js) throw SimError("cannot read " + path + ".json");
    nlohmann::json meta = nlohmann::json::parse(js);
    VorticityField f;
    f.n = meta.at("n").get<int>();
    f.box_length = meta.at("box_length").get<double>();
    f.time = meta.at("time").get<double>();
    if (nu_out) *nu_out = meta.at("nu").get<double>();
    f.values.resize(std::size_t(f.n) * f.n);
    std::ifstream bin(path + ".bin", std::ios::binary);
    if (!bin) throw SimError("cannot read " + path + ".bin");
    bin.read(reinterpret_cast<char*>(f.values.data()),
             std::streamsize(f.values.size() * sizeof(double)));
    if (!bin) throw SimError("truncated field data in " + path + ".bin");
    f.validate();
    return f;
}

void export_field_csv(const VorticityField& f, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw SimError("cannot write " + path);
    out << "ix,iy,x,y,w\n";
    for (int iy = 0; iy < f.n; ++iy)
        for (int ix = 0; ix < f.n; ++ix)
            out << ix << ',' << iy << ',' << format_double(f.node_x(ix)) << ','
                << format_double(f.node_y(iy)) << ','
                << format_double(f.at(ix, iy)) << '\n';
}

double LambOseen::value(double t, Vec2 x) const {
    double v = s2(t);
    double r2 = norm2(x - center);
    return gamma / (2.0 * M_PI * v) * std::exp(-r2 / (2.0 * v));
}

VorticityField LambOseen::field(double t, double box_length, int n) const {
    VorticityField f;
    f.n = n;
    f.box_length = box_length;
    f.time = t;
    f.values.resize(std::size_t(n) * n);
    for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix)
            f.at(ix, iy) = value(t, {f.node_x(ix), f.node_y(iy)});
    return f;
}

VorticityField eigenmode_field(double box_length, int n, double amplitude) {
    VorticityField f;
    f.n = n;
    f.box_length = box_length;
    f.time = 0.0;
    f.values.resize(std::size_t(n) * n);
    double k = 2.0 * M_PI / box_length;
    for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix)
            f.at(ix, iy) =
                amplitude * std::sin(k * f.node_x(ix)) * std::sin(k * f.node_y(iy));
    return f;
}

VorticityField random_smooth_field(double box_length, int n, int kmax,
                                   double amplitude, std::uint64_t seed) {
    VorticityField f;
    f.n = n;
    f.box_length = box_length;
    f.time = 0.0;
    f.values.assign(std::size_t(n) * n, 0.0);
    double kb = 2.0 * M_PI / box_length;
    std::uint64_t stream = 0;
    for (int kx = -kmax; kx <= kmax; ++kx) {
        for (int ky = -kmax; ky <= kmax; ++ky) {
            if (kx == 0 && ky == 0) continue;
            // one cosine per (kx, ky); conjugate pairs collapse, fine for
            // a synthetic initial condition
            auto u = rng::uniform_pair(seed, rng::Domain::scratch, stream++, 0);
            double amp = 2.0 * u[0] - 1.0;
            double phase = 2.0 * M_PI * u[1];
            for (int iy = 0; iy < n; ++iy)
                for (int ix = 0; ix < n; ++ix)
                    f.at(ix, iy) += amp * std::cos(kb * (kx * f.node_x(ix) +
                                                         ky * f.node_y(iy)) +
                                                   phase);
        }
    }
    double mx = 0.0;
    for (double v : f.values) mx = std::max(mx, std::abs(v));
    if (mx > 0.0)
        for (double& v : f.values) v *= amplitude / mx;
    return f;
}

} // namespace vlab
