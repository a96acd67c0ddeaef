#include "nslab/cauchy.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "nslab/io.hpp"
#include "nslab/ops.hpp"
#include "nslab/weighted.hpp"

namespace nslab {

std::string to_string(DataTier t) {
    switch (t) {
        case DataTier::D: return "D";
        case DataTier::D1: return "D1";
        default: return "D2";
    }
}

DataTier tier_from_string(const std::string& s) {
    if (s == "D") return DataTier::D;
    if (s == "D1") return DataTier::D1;
    if (s == "D2") return DataTier::D2;
    throw std::invalid_argument("unknown data tier '" + s + "'");
}

double gaussian_sample(std::uint64_t& state) {
    // splitmix64 stream feeding a Box-Muller cosine branch
    auto next = [&state]() {
        state += 0x9e3779b97f4a7c15ull;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    };
    double u1 = ((next() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
    double u2 = (next() >> 11) * 0x1.0p-53;        // [0, 1)
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::acos(-1.0) * u2);
}

std::vector<GammaEntry> gamma_entries(const DomainSpec& dom) {
    std::vector<GammaEntry> out;
    for (const FaceId& f : dom.gamma_faces)
        for (const auto& [idx, w] : face_quadrature(dom.grid, f))
            out.push_back({f, idx, w});
    return out;
}

namespace {

// closure table per tier: name -> (ncomp, evaluator)
struct TraceSpec {
    std::string name;
    int ncomp;
    std::function<void(const Vec3&, double, double*)> eval;
};

std::vector<TraceSpec> trace_table(const ManufacturedSolution& sol, DataTier tier) {
    const int dim = sol.dim();
    const int rc = sol.rot_comps();
    std::vector<TraceSpec> specs;
    auto add_v = [&](const std::string& name, int k) {
        specs.push_back({name, dim, [&sol, k, dim](const Vec3& x, double t, double* out) {
                             Vec3 val = sol.v(x, t, k);
                             for (int c = 0; c < dim; ++c) out[c] = val[c];
                         }});
    };
    auto add_rot = [&](const std::string& name, int k) {
        specs.push_back({name, rc, [&sol, k, rc](const Vec3& x, double t, double* out) {
                             Vec3 val = sol.rot_v(x, t, k);
                             for (int c = 0; c < rc; ++c) out[c] = val[c];
                         }});
    };
    auto add_grad_v = [&](const std::string& name, int k) {
        specs.push_back({name, dim * dim, [&sol, k, dim](const Vec3& x, double t, double* out) {
                             Mat9 m = sol.grad_v(x, t, k);
                             for (int c = 0; c < dim; ++c)
                                 for (int a = 0; a < dim; ++a) out[c * dim + a] = m[c * 3 + a];
                         }});
    };
    auto add_grad_rot = [&](const std::string& name, int k) {
        specs.push_back({name, rc * dim, [&sol, k, dim, rc](const Vec3& x, double t, double* out) {
                             Mat9 m = sol.grad_rot_v(x, t, k);
                             for (int c = 0; c < rc; ++c)
                                 for (int a = 0; a < dim; ++a) out[c * dim + a] = m[c * 3 + a];
                         }});
    };

    add_v("v", 0);
    add_rot("rot_v", 0);
    add_grad_v("grad_v", 0);
    add_grad_rot("grad_rot_v", 0);
    add_rot("dt_rot_v", 1);
    if (tier != DataTier::D) {
        add_v("dt_v", 1);
        add_grad_v("grad_dt_v", 1);
        add_grad_rot("grad_dt_rot_v", 1);
        add_rot("dt2_rot_v", 2);
    }
    if (tier == DataTier::D2) {
        add_v("dt2_v", 2);
        add_grad_v("grad_dt2_v", 2);
        add_grad_rot("grad_dt2_rot_v", 2);
        add_rot("dt3_rot_v", 3);
    }
    return specs;
}

// L2(Gamma x I) norm of a stored trace
double trace_norm(const TraceField& tf, const std::vector<GammaEntry>& entries,
                  const TimeAxis& ta) {
    double acc = 0;
    int ns = ta.slices();
    for (std::size_t e = 0; e < entries.size(); ++e) {
        for (int k = 0; k < ns; ++k) {
            double s = 0;
            for (int c = 0; c < tf.ncomp; ++c) {
                double v = tf.values[(e * ns + k) * tf.ncomp + c];
                s += v * v;
            }
            acc += entries[e].weight * ta.quad_weight(k) * s;
        }
    }
    return std::sqrt(acc);
}

TraceField trace_difference(const TraceField& a, const TraceField& b) {
    TraceField d = a;
    for (std::size_t i = 0; i < d.values.size(); ++i) d.values[i] -= b.values[i];
    return d;
}

struct TierMagnitudes {
    double D = 0, D1 = 0, D2 = 0;
};

// combined space-time gradient norm pairs per the data functionals
TierMagnitudes tier_magnitudes(const std::map<std::string, TraceField>& tr,
                               const std::vector<GammaEntry>& entries, const TimeAxis& ta,
                               DataTier tier, double snap_h3, double snap_h4) {
    auto n = [&](const std::string& name) { return trace_norm(tr.at(name), entries, ta); };
    auto hyp = [](double a, double b) { return std::sqrt(a * a + b * b); };
    TierMagnitudes m;
    double n_rot = n("rot_v"), n_v = n("v");
    double n_grad_rot = n("grad_rot_v"), n_dt_rot = n("dt_rot_v"), n_grad_v = n("grad_v");
    m.D = n_rot + hyp(n_grad_rot, n_dt_rot) + n_v + n_grad_v;
    if (tier == DataTier::D) return m;
    double n_dt_v = n("dt_v"), n_gdt_v = n("grad_dt_v");
    double n_gdt_rot = n("grad_dt_rot_v"), n_dt2_rot = n("dt2_rot_v");
    m.D1 = m.D + n_dt_rot + n_dt_v + hyp(n_gdt_rot, n_dt2_rot) + n_gdt_v + snap_h3;
    if (tier == DataTier::D1) return m;
    double n_dt2_v = n("dt2_v"), n_gdt2_v = n("grad_dt2_v");
    double n_gdt2_rot = n("grad_dt2_rot_v"), n_dt3_rot = n("dt3_rot_v");
    m.D2 = m.D1 - snap_h3 + n_dt2_rot + n_dt2_v + hyp(n_gdt2_rot, n_dt3_rot) + n_gdt2_v + snap_h4;
    return m;
}

// boundary x I norm from closures over all faces
double boundary_norm(const DomainSpec& dom, int ncomp,
                     const std::function<void(const Vec3&, double, double*)>& eval) {
    std::vector<FaceId> all = dom.gamma_faces;
    all.insert(all.end(), dom.rest_faces.begin(), dom.rest_faces.end());
    const TimeAxis& ta = dom.taxis;
    double acc = 0;
    std::vector<double> buf(ncomp);
    for (const FaceId& f : all) {
        for (const auto& [idx, w] : face_quadrature(dom.grid, f)) {
            Vec3 x = dom.grid.coord(idx);
            for (int k = 0; k < ta.slices(); ++k) {
                eval(x, ta.time(k), buf.data());
                double s = 0;
                for (double v : buf) s += v * v;
                acc += w * ta.quad_weight(k) * s;
            }
        }
    }
    return std::sqrt(acc);
}

// H1(Omega) norm of rot dt^k v at a fixed time, from closures
double h1_rot_slice(const ManufacturedSolution& sol, const DomainSpec& dom, double t, int k) {
    const Grid& g = dom.grid;
    const int rc = sol.rot_comps();
    const int dim = sol.dim();
    double acc = 0;
    for (std::size_t idx = 0; idx < g.num_nodes(); ++idx) {
        Vec3 x = g.coord(idx);
        Vec3 r = sol.rot_v(x, t, k);
        Mat9 gr = sol.grad_rot_v(x, t, k);
        double s = 0;
        for (int c = 0; c < rc; ++c) {
            s += r[c] * r[c];
            for (int a = 0; a < dim; ++a) s += gr[c * 3 + a] * gr[c * 3 + a];
        }
        acc += g.quad_weight(idx) * s;
    }
    return std::sqrt(acc);
}

}  // namespace

TraceField extract_trace(const SpaceTimeField& f, const DomainSpec& dom,
                         const std::vector<GammaEntry>& entries) {
    TraceField out;
    out.ncomp = f.ncomp();
    int ns = f.slices();
    out.values.resize(entries.size() * ns * f.ncomp());
    for (std::size_t e = 0; e < entries.size(); ++e)
        for (int k = 0; k < ns; ++k)
            for (int c = 0; c < f.ncomp(); ++c)
                out.values[(e * ns + k) * f.ncomp() + c] = f.at(k, c, entries[e].node);
    (void)dom;
    return out;
}

TraceField extract_normal_derivative(const SpaceTimeField& f, const DomainSpec& dom,
                                     const std::vector<GammaEntry>& entries) {
    TraceField out;
    out.ncomp = f.ncomp();
    int ns = f.slices();
    out.values.resize(entries.size() * ns * f.ncomp());
    const Grid& g = f.grid();
    for (std::size_t e = 0; e < entries.size(); ++e) {
        const GammaEntry& ge = entries[e];
        auto m = g.multi_index(ge.node);
        int axis = ge.face.axis;
        double h = g.h(axis);
        int dir = ge.face.side == 1 ? -1 : 1;  // inward step
        std::array<int, 3> m1 = m, m2 = m;
        m1[axis] += dir;
        m2[axis] += 2 * dir;
        std::size_t i1 = g.index(m1[0], m1[1], m1[2]);
        std::size_t i2 = g.index(m2[0], m2[1], m2[2]);
        // outward-normal derivative; sign works out the same on both sides
        for (int k = 0; k < ns; ++k)
            for (int c = 0; c < f.ncomp(); ++c)
                out.values[(e * ns + k) * f.ncomp() + c] =
                    (3.0 * f.at(k, c, ge.node) - 4.0 * f.at(k, c, i1) + f.at(k, c, i2)) / (2 * h);
    }
    (void)dom;
    return out;
}

bool CauchyDataset::same_values(const CauchyDataset& o) const {
    if (traces.size() != o.traces.size()) return false;
    for (const auto& [name, tf] : traces) {
        auto it = o.traces.find(name);
        if (it == o.traces.end() || it->second.values != tf.values) return false;
    }
    if (has_snapshot != o.has_snapshot) return false;
    if (has_snapshot && snapshot_v.data() != o.snapshot_v.data()) return false;
    return true;
}

std::uint64_t CauchyDataset::digest() const {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](const void* p, std::size_t n) {
        const unsigned char* b = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= b[i];
            h *= 1099511628211ull;
        }
    };
    for (const auto& [name, tf] : traces) {
        mix(name.data(), name.size());
        mix(tf.values.data(), tf.values.size() * sizeof(double));
    }
    if (has_snapshot) mix(snapshot_v.data().data(), snapshot_v.data().size() * sizeof(double));
    return h;
}

CauchyDataset generate_cauchy_data(const ManufacturedSolution& sol,
                                   const CoefficientFields& coeffs, const DomainSpec& dom,
                                   DataTier tier, double sigma, std::uint64_t seed,
                                   const Forcing* forcing) {
    CauchyDataset ds;
    ds.tier = tier;
    ds.sigma = sigma;
    ds.seed = seed;
    ds.entries = gamma_entries(dom);
    ds.slices = dom.taxis.slices();
    const TimeAxis& ta = dom.taxis;

    // exact traces from closures
    auto specs = trace_table(sol, tier);
    std::map<std::string, TraceField> exact;
    for (const auto& sp : specs) {
        TraceField tf;
        tf.ncomp = sp.ncomp;
        tf.values.resize(ds.entries.size() * ta.slices() * sp.ncomp);
        for (std::size_t e = 0; e < ds.entries.size(); ++e) {
            Vec3 x = dom.grid.coord(ds.entries[e].node);
            for (int k = 0; k < ta.slices(); ++k)
                sp.eval(x, ta.time(k), &tf.values[(e * ta.slices() + k) * sp.ncomp]);
        }
        exact[sp.name] = std::move(tf);
    }

    // exact snapshot
    Field snap_exact(dom.grid, sol.dim());
    if (tier != DataTier::D) {
        for (std::size_t idx = 0; idx < dom.grid.num_nodes(); ++idx) {
            Vec3 val = sol.v(dom.grid.coord(idx), ta.t0(), 0);
            for (int c = 0; c < sol.dim(); ++c) snap_exact.at(c, idx) = val[c];
        }
        ds.has_snapshot = true;
    }

    // seeded relative Gaussian perturbation per trace (map order is fixed)
    ds.traces = exact;
    Field snap_noisy = snap_exact;
    if (sigma > 0) {
        std::uint64_t state = seed * 0x9e3779b97f4a7c15ull + 0xd1b54a32d192ed03ull;
        for (auto& [name, tf] : ds.traces) {
            double rms = 0;
            for (double v : tf.values) rms += v * v;
            rms = tf.values.empty() ? 0.0 : std::sqrt(rms / tf.values.size());
            if (rms == 0.0) rms = 1e-30;  // zero traces stay zero up to rounding
            for (double& v : tf.values) v += sigma * rms * gaussian_sample(state);
        }
        if (ds.has_snapshot) {
            double rms = 0;
            for (double v : snap_noisy.data()) rms += v * v;
            rms = std::sqrt(rms / snap_noisy.data().size());
            if (rms > 0) {
                // snapshot perturbations are mollified: the tier assumes a
                // Sobolev-bounded snapshot, and raw white noise would leave
                // that class under refinement
                Field noise(dom.grid, snap_noisy.ncomp());
                for (double& v : noise.data()) v = gaussian_sample(state);
                for (int pass = 0; pass < 2; ++pass) {
                    Field sm = noise;
                    const Grid& g = dom.grid;
                    for (int c = 0; c < noise.ncomp(); ++c) {
                        for (std::size_t idx = 0; idx < g.num_nodes(); ++idx) {
                            auto mi = g.multi_index(idx);
                            double acc = 0, wsum = 0;
                            for (int a = 0; a < g.dim(); ++a) {
                                for (int stp : {-1, 1}) {
                                    auto mm = mi;
                                    mm[a] += stp;
                                    if (mm[a] < 0 || mm[a] > g.intervals(a)) continue;
                                    acc += noise.at(c, g.index(mm[0], mm[1], mm[2]));
                                    wsum += 1;
                                }
                            }
                            sm.at(c, idx) = 0.5 * noise.at(c, idx) +
                                            0.5 * (wsum > 0 ? acc / wsum : 0.0);
                        }
                    }
                    noise = sm;
                }
                double nrms = 0;
                for (double v : noise.data()) nrms += v * v;
                nrms = std::sqrt(nrms / noise.data().size());
                double scale_n = nrms > 0 ? sigma * rms / nrms : 0.0;
                for (std::size_t i = 0; i < snap_noisy.data().size(); ++i)
                    snap_noisy.data()[i] += scale_n * noise.data()[i];
            }
        }
    }
    ds.snapshot_v = snap_noisy;

    // magnitudes of the dataset and of the injected perturbation
    double h3 = 0, h4 = 0, h3n = 0, h4n = 0;
    if (ds.has_snapshot) {
        h3 = std::sqrt(ops::sobolev_norm_sq(snap_noisy, 3));
        Field diff = snap_noisy - snap_exact;
        h3n = std::sqrt(ops::sobolev_norm_sq(diff, 3));
        if (tier == DataTier::D2) {
            h4 = std::sqrt(ops::sobolev_norm_sq(snap_noisy, 4));
            h4n = std::sqrt(ops::sobolev_norm_sq(diff, 4));
        }
    }
    auto mags = tier_magnitudes(ds.traces, ds.entries, ta, tier, h3, h4);
    ds.mag_D = mags.D;
    ds.mag_D1 = mags.D1;
    ds.mag_D2 = mags.D2;
    std::map<std::string, TraceField> noise;
    for (const auto& [name, tf] : ds.traces) noise[name] = trace_difference(tf, exact[name]);
    auto nm = tier_magnitudes(noise, ds.entries, ta, tier, h3n, h4n);
    ds.noise_D = nm.D;
    ds.noise_D1 = nm.D1;
    ds.noise_D2 = nm.D2;

    // a-priori bounds from the exact solution
    const int dim = sol.dim(), rc = sol.rot_comps();
    auto eval_pair = [&](int j, int k) {
        // returns ||grad_xt^j dt^k rot v|| + ||grad^j dt^k v|| over boundary x I
        double rot_part, v_part;
        if (j == 0) {
            rot_part = boundary_norm(dom, rc, [&](const Vec3& x, double t, double* o) {
                Vec3 r = sol.rot_v(x, t, k);
                for (int c = 0; c < rc; ++c) o[c] = r[c];
            });
            v_part = boundary_norm(dom, dim, [&](const Vec3& x, double t, double* o) {
                Vec3 r = sol.v(x, t, k);
                for (int c = 0; c < dim; ++c) o[c] = r[c];
            });
        } else {
            rot_part = boundary_norm(dom, rc * (dim + 1), [&](const Vec3& x, double t, double* o) {
                Mat9 m = sol.grad_rot_v(x, t, k);
                Vec3 dt = sol.rot_v(x, t, k + 1);
                for (int c = 0; c < rc; ++c) {
                    for (int a = 0; a < dim; ++a) o[c * (dim + 1) + a] = m[c * 3 + a];
                    o[c * (dim + 1) + dim] = dt[c];
                }
            });
            v_part = boundary_norm(dom, dim * dim, [&](const Vec3& x, double t, double* o) {
                Mat9 m = sol.grad_v(x, t, k);
                for (int c = 0; c < dim; ++c)
                    for (int a = 0; a < dim; ++a) o[c * dim + a] = m[c * 3 + a];
            });
        }
        return rot_part + v_part;
    };

    double linf_h1 = 0;
    for (int k = 0; k < ta.slices(); ++k)
        linf_h1 = std::max(linf_h1, h1_rot_slice(sol, dom, ta.time(k), 0));
    ds.bound_M = eval_pair(0, 0) + eval_pair(1, 0) + linf_h1;

    double m1_sum = 0;
    for (int j = 0; j <= 1; ++j)
        for (int k = 0; k <= 1; ++k) m1_sum += eval_pair(j, k);
    double ends = 0;
    for (int k = 0; k <= 1; ++k) {
        ends += h1_rot_slice(sol, dom, ta.t_begin(), k);
        ends += h1_rot_slice(sol, dom, ta.t_end(), k);
    }
    ds.bound_M1 = m1_sum + ends;

    if (tier == DataTier::D2) {
        double m2_sum = 0;
        for (int j = 0; j <= 1; ++j)
            for (int k = 0; k <= 2; ++k) m2_sum += eval_pair(j, k);
        double ends2 = 0;
        for (int k = 0; k <= 2; ++k) {
            ends2 += h1_rot_slice(sol, dom, ta.t_begin(), k);
            ends2 += h1_rot_slice(sol, dom, ta.t_end(), k);
        }
        ds.bound_M2 = m2_sum + ends2;
    }

    if (forcing) {
        Field f0(dom.grid, dim);
        for (std::size_t idx = 0; idx < dom.grid.num_nodes(); ++idx) {
            Vec3 val = forcing->F(dom.grid.coord(idx), ta.t0(), 0);
            for (int c = 0; c < dim; ++c) f0.at(c, idx) = val[c];
        }
        ds.bound_m1 = std::sqrt(ops::sobolev_norm_sq(f0, 2));
    }
    (void)coeffs;
    return ds;
}

void save_dataset(const CauchyDataset& ds, const DomainSpec& dom, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const TimeAxis& ta = dom.taxis;
    for (const auto& [name, tf] : ds.traces) {
        CsvWriter csv(dir + "/" + name + ".csv");
        std::vector<std::string> header = {"face_axis", "face_side", "node", "t"};
        for (int c = 0; c < tf.ncomp; ++c) header.push_back("c" + std::to_string(c));
        csv.row(header);
        for (std::size_t e = 0; e < ds.entries.size(); ++e) {
            for (int k = 0; k < ta.slices(); ++k) {
                std::vector<std::string> row = {
                    std::to_string(ds.entries[e].face.axis),
                    std::to_string(ds.entries[e].face.side),
                    std::to_string(ds.entries[e].node), format_double(ta.time(k))};
                for (int c = 0; c < tf.ncomp; ++c)
                    row.push_back(format_double(tf.values[(e * ta.slices() + k) * tf.ncomp + c]));
                csv.row(row);
            }
        }
    }
    if (ds.has_snapshot) {
        CsvWriter csv(dir + "/snapshot_v.csv");
        std::vector<std::string> header = {"node"};
        for (int c = 0; c < ds.snapshot_v.ncomp(); ++c) header.push_back("c" + std::to_string(c));
        csv.row(header);
        for (std::size_t idx = 0; idx < ds.snapshot_v.num_nodes(); ++idx) {
            std::vector<std::string> row = {std::to_string(idx)};
            for (int c = 0; c < ds.snapshot_v.ncomp(); ++c)
                row.push_back(format_double(ds.snapshot_v.at(c, idx)));
            csv.row(row);
        }
    }
    write_text_file(dir + "/manifest.json", dataset_manifest(ds).dump(2) + "\n");
}

nlohmann::json dataset_manifest(const CauchyDataset& ds) {
    nlohmann::json j;
    j["tier"] = to_string(ds.tier);
    j["sigma"] = ds.sigma;
    j["seed"] = ds.seed;
    j["time_derivatives_source"] = "analytic";
    j["magnitudes"] = {{"D", ds.mag_D}, {"D1", ds.mag_D1}, {"D2", ds.mag_D2}};
    j["noise_magnitudes"] = {{"D", ds.noise_D}, {"D1", ds.noise_D1}, {"D2", ds.noise_D2}};
    j["bounds"] = {{"M", ds.bound_M}, {"M1", ds.bound_M1}, {"M2", ds.bound_M2},
                   {"m1", ds.bound_m1}};
    std::vector<std::string> names;
    for (const auto& [name, tf] : ds.traces) names.push_back(name);
    j["traces"] = names;
    j["digest"] = ds.digest();
    return j;
}

}  // namespace nslab
