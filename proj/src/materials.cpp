#include "photonode/materials.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace photonode::materials {

bool Material::in_range(double wavelength_nm) const {
    const double um = wavelength_nm * 1e-3;
    return um >= valid_min_um && um <= valid_max_um;
}

static void check_range(const Material& m, double wavelength_nm) {
    if (!m.in_range(wavelength_nm)) {
        std::ostringstream os;
        os << "wavelength " << wavelength_nm << " nm outside validity range of " << m.name
           << " [" << m.valid_min_um * 1e3 << ", " << m.valid_max_um * 1e3 << "] nm";
        throw std::out_of_range(os.str());
    }
}

double refractive_index(const Material& m, double wavelength_nm) {
    check_range(m, wavelength_nm);
    const double l2 = wavelength_nm * 1e-3 * wavelength_nm * 1e-3;
    double n2 = 1.0;
    for (const auto& t : m.terms) n2 += t.B * l2 / (l2 - t.C_um2);
    if (!(n2 > 0.0)) throw std::domain_error("negative permittivity for " + m.name);
    return std::sqrt(n2);
}

double index_derivative(const Material& m, double wavelength_nm) {
    check_range(m, wavelength_nm);
    const double l = wavelength_nm * 1e-3;
    const double l2 = l * l;
    // d(n^2)/dl = sum -2 B C l / (l^2 - C)^2, per micrometre
    double dn2 = 0.0;
    for (const auto& t : m.terms) {
        const double d = l2 - t.C_um2;
        dn2 += -2.0 * t.B * t.C_um2 * l / (d * d);
    }
    const double n = refractive_index(m, wavelength_nm);
    return dn2 / (2.0 * n) * 1e-3; // 1/um -> 1/nm
}

MaterialLibrary MaterialLibrary::builtin() {
    MaterialLibrary lib;
    // Sources recorded in data/materials.txt alongside the same coefficients.
    lib.add(Material{"GaP",
                     {{1.680, 0.0}, {6.40, 0.0903279}},
                     0.45, 4.0,
                     "single-oscillator fit to Bond, J. Appl. Phys. 36, 1674 (1965)"});
    lib.add(Material{"GaAs",
                     {{4.372514, 0.0},
                      {5.466742, 0.19636482},
                      {0.0242996, 0.76500440},
                      {1.9575220, 1362.8354}},
                     0.90, 16.0,
                     "Skauli et al., J. Appl. Phys. 94, 6447 (2003); range clipped below 900 nm"});
    lib.add(Material{"Diamond",
                     {{0.3306, 0.030625}, {4.3356, 0.011236}},
                     0.225, 10.0,
                     "Peter, Z. Phys. 15, 358 (1923)"});
    lib.add(Material{"Air", {}, 0.0, 1e9, "vacuum index"});
    return lib;
}

void MaterialLibrary::add(Material m) { table_[m.name] = std::move(m); }

const Material& MaterialLibrary::get(const std::string& name) const {
    auto it = table_.find(name);
    if (it == table_.end())
        throw std::out_of_range("unknown material '" + name + "'");
    return it->second;
}

std::vector<std::string> MaterialLibrary::names() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : table_) out.push_back(k);
    return out;
}

MaterialLibrary MaterialLibrary::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open materials file: " + path);
    MaterialLibrary lib;
    Material cur;
    bool open = false;
    std::string line;
    int lineno = 0;
    auto flush = [&]() {
        if (open) lib.add(cur);
        cur = Material{};
        open = false;
    };
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        // trim
        auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        auto e = line.find_last_not_of(" \t\r");
        line = line.substr(b, e - b + 1);
        if (line.front() == '[' && line.back() == ']') {
            flush();
            cur.name = line.substr(1, line.size() - 2);
            open = true;
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos || !open) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected 'key = value' inside a [Material] block");
        }
        std::string key = line.substr(0, eq);
        key.erase(key.find_last_not_of(" \t") + 1);
        std::istringstream val(line.substr(eq + 1));
        try {
            if (key == "term") {
                SellmeierTerm t;
                val >> t.B >> t.C_um2;
                if (val.fail()) throw std::runtime_error("need 'B C_um2'");
                cur.terms.push_back(t);
            } else if (key == "valid_range_um") {
                val >> cur.valid_min_um >> cur.valid_max_um;
                if (val.fail()) throw std::runtime_error("need 'min max'");
            } else if (key == "source") {
                std::getline(val, cur.source);
                auto s = cur.source.find_first_not_of(" \t");
                if (s != std::string::npos) cur.source = cur.source.substr(s);
            } else {
                throw std::runtime_error("unknown key '" + key + "'");
            }
        } catch (const std::exception& ex) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + ex.what());
        }
    }
    flush();
    return lib;
}

} // namespace photonode::materials
