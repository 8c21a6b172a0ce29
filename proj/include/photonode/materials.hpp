#pragma once

#include <string>
#include <vector>
#include <map>
#include <optional>

namespace photonode::materials {

/// One term of a Sellmeier expansion n^2(lambda) = 1 + sum_i B_i lambda^2 / (lambda^2 - C_i),
/// with lambda in micrometres and C_i in um^2. A constant offset is a term with C = 0.
struct SellmeierTerm {
    double B = 0.0;
    double C_um2 = 0.0;
};

struct Material {
    std::string name;
    std::vector<SellmeierTerm> terms;   // empty => vacuum/air, n = 1 exactly
    double valid_min_um = 0.0;
    double valid_max_um = 1e9;
    std::string source;                 // provenance of the coefficients

    bool in_range(double wavelength_nm) const;
};

/// Refractive index at wavelength (nm). Throws std::out_of_range when the wavelength
/// falls outside the material's tabulated validity interval.
double refractive_index(const Material& m, double wavelength_nm);

/// Analytic d n / d lambda in 1/nm at wavelength (nm). Same range policy as refractive_index,
/// except the wavelength must lie strictly inside the interval.
double index_derivative(const Material& m, double wavelength_nm);

/// Collection of named materials, loadable from the key-value text format in data/materials.txt.
class MaterialLibrary {
public:
    /// Built-in GaP / GaAs / Diamond / Air coefficients (same values as data/materials.txt).
    static MaterialLibrary builtin();
    /// Parse the key-value text format. Throws std::runtime_error with line context on parse errors.
    static MaterialLibrary load(const std::string& path);

    const Material& get(const std::string& name) const;
    bool has(const std::string& name) const { return table_.count(name) > 0; }
    void add(Material m);
    std::vector<std::string> names() const;

private:
    std::map<std::string, Material> table_;
};

} // namespace photonode::materials
