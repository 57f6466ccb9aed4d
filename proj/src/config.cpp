#include "dppphd/config.hpp"

#include "dppphd/errors.hpp"

#include <boost/math/constants/constants.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace dppphd {

namespace {

namespace pt = boost::property_tree;

constexpr double kPi = boost::math::double_constants::pi;

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& field, const std::string& v) {
    try {
        size_t used = 0;
        const double d = std::stod(v, &used);
        if (trim(v.substr(used)).empty()) return d;
    } catch (const std::exception&) {
    }
    throw ConfigError(field, "expected a number, got '" + v + "'");
}

long long to_integer(const std::string& field, const std::string& v) {
    try {
        size_t used = 0;
        const long long d = std::stoll(v, &used);
        if (trim(v.substr(used)).empty()) return d;
    } catch (const std::exception&) {
    }
    throw ConfigError(field, "expected an integer, got '" + v + "'");
}

bool to_bool(const std::string& field, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError(field, "expected a boolean, got '" + v + "'");
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::vector<double> to_doubles(const std::string& field, const std::string& v) {
    std::vector<double> out;
    for (const auto& s : split(v, ',')) out.push_back(to_double(field, s));
    return out;
}

std::vector<Rect> to_rects(const std::string& field, const std::string& v) {
    std::vector<Rect> out;
    for (const auto& r : split(v, ';')) {
        std::vector<double> c;
        std::stringstream ss(r);
        std::string tok;
        while (ss >> tok) c.push_back(to_double(field, tok));
        if (c.size() != 4) throw ConfigError(field, "each rectangle needs 'x0 x1 y0 y1'");
        if (!(c[1] > c[0]) || !(c[3] > c[2])) throw ConfigError(field, "rectangle with nonpositive side");
        out.push_back({c[0], c[1], c[2], c[3]});
    }
    return out;
}

FilterChoice to_filter(const std::string& field, const std::string& v) {
    if (v == "dpp") return FilterChoice::dpp;
    if (v == "ppp") return FilterChoice::ppp;
    if (v == "both") return FilterChoice::both;
    throw ConfigError(field, "expected dpp, ppp or both");
}

ResampleMode to_resample(const std::string& field, const std::string& v) {
    if (v == "multinomial") return ResampleMode::multinomial;
    if (v == "systematic") return ResampleMode::systematic;
    if (v == "top_k") return ResampleMode::top_k;
    throw ConfigError(field, "expected multinomial, systematic or top_k");
}

BirthMassMode to_birth_mode(const std::string& field, const std::string& v) {
    if (v == "literal") return BirthMassMode::literal;
    if (v == "fixed") return BirthMassMode::fixed;
    throw ConfigError(field, "expected literal or fixed");
}

std::string resample_name(ResampleMode m) {
    switch (m) {
    case ResampleMode::multinomial:
        return "multinomial";
    case ResampleMode::systematic:
        return "systematic";
    case ResampleMode::top_k:
        return "top_k";
    }
    return "multinomial";
}

using Setter = void (*)(ExperimentConfig&, const std::string&, const std::string&);

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"experiment.name", [](ExperimentConfig& c, const std::string&, const std::string& v) { c.name = v; }},
        {"experiment.filter",
         [](ExperimentConfig& c, const std::string& f, const std::string& v) { c.filter = to_filter(f, v); }},
        {"experiment.mc_runs",
         [](ExperimentConfig& c, const std::string& f, const std::string& v) {
             c.mc_runs = static_cast<int>(to_integer(f, v));
         }},
        {"experiment.steps",
         [](ExperimentConfig& c, const std::string& f, const std::string& v) {
             c.steps = static_cast<int>(to_integer(f, v));
         }},
        {"experiment.seed",
         [](ExperimentConfig& c, const std::string& f, const std::string& v) {
             try {
                 size_t used = 0;
                 c.seed = std::stoull(v, &used);
                 if (!trim(v.substr(used)).empty()) throw std::invalid_argument(v);
             } catch (const std::exception&) {
                 throw ConfigError(f, "expected an unsigned 64-bit integer, got '" + v + "'");
             }
         }},
        {"experiment.threads",
         [](ExperimentConfig& c, const std::string& f, const std::string& v) {
             c.threads = static_cast<int>(to_integer(f, v));
         }},
        {"experiment.output_dir", [](ExperimentConfig& c, const std::string&, const std::string& v) { c.output_dir = v; }},
        {"experiment.ospa_c",
         [](ExperimentConfig& c, const std::string& f, const std::string& v) { c.ospa_c = to_double(f, v); }},
        {"experiment.ospa_p",
         [](ExperimentConfig& c, const std::string& f, const std::string& v) { c.ospa_p = to_double(f, v); }},
        {"experiment.zeta_values",
         [](ExperimentConfig& c, const std::string& f, const std::string& v) { c.zeta_values = to_doubles(f, v); }},

        {"dynamics.tau",
         [](ExperimentConfig& c, const std::string& f, const std::string& v) {
             c.scenario.dynamics.tau = to_double(f, v);
         }},
        {"dynamics.sigma_vx",
         [](ExperimentConfig& c, const std::string& f, const std::string& v) {
             c.scenario.dynamics.sigma_vx = to_double(f, v);
         }},
        {"dynamics.sigma_vy",
         [](ExperimentConfig& c, const std::string& f, const std::string& v) {
             c.scenario.dynamics.sigma_vy = to_double(f, v);
         }},
        {"dynamics.sigma_vtheta",
         [](ExperimentConfig& c, const std::string& f, const std::string& v) {
             c.scenario.dynamics.sigma_vtheta = to_double(f, v);
         }},
        {"dynamics.zeta_x",
         [](ExperimentConfig& c, const std::string& f, const std::string& v) {
             c.scenario.dynamics.zeta_x = to_double(f, v);
         }},
        {"dynamics.zeta_y",
         [](ExperimentConfig& c, const std::string& f, const std::string& v) {
             c.scenario.dynamics.zeta_y = to_double(f, v);
         }},
        {"dynamics.position_norm",
         [](ExperimentConfig& c, const std::string& f, const std::string& v) {
             c.scenario.dynamics.position_norm = to_bool(f, v);
         }},

        {"sensor.sigma_r",
         [](ExperimentConfig& c, const std::string& f, const std::string& v) {
             c.scenario.sensor.sigma_r = to_double(f, v);
         }},
        {"sensor.sigma_b",
         [](ExperimentConfig& c, const std::string& f, const std::string& v) {
             c.scenario.sensor.sigma_b = to_double(f, v);
         }},
        {"sensor.p_d",
         [](ExperimentConfig& c, const std::string& f, const std::string& v) {
             c.scenario.sensor.p_d = to_double(f, v);
         }},
        {"sensor.clutter_mean",
         [](ExperimentConfig& c, const std::string& f, const std::string& v) {
             c.scenario.sensor.clutter_mean = to_double(f, v);
         }},
        {"sensor.clutter_mean_late",
         [](ExperimentConfig& c, const std::string& f, const std::string& v) {
             c.scenario.clutter_mean_late = to_double(f, v);
         }},
        {"sensor.clutter_switch_t",
         [](ExperimentConfig& c, const std::string& f, const std::string& v) {
             c.scenario.clutter_switch_t = static_cast<int>(to_integer(f, v));
         }},

        {"window.rects",
         [](ExperimentConfig& c, const std::string& f, const std::string& v) {
             c.scenario.sensor.window.rects = to_rects(f, v);
         }},
        {"window.targets_per_rect",
         [](ExperimentConfig& c, const std::string& f, const std::string& v) {
             c.scenario.targets_per_rect.clear();
             for (const auto& s : split(v, ','))
                 c.scenario.targets_per_rect.push_back(static_cast<int>(to_integer(f, s)));
         }},
        {"window.init_spread",
         [](ExperimentConfig& c, const std::string& f, const std::string& v) {
             c.scenario.init_spread = to_double(f, v);
         }},
        {"window.init_uniform",
         [](ExperimentConfig& c, const std::string& f, const std::string& v) {
             c.scenario.init_uniform = to_bool(f, v);
         }},
        {"window.init_speed",
         [](ExperimentConfig& c, const std::string& f, const std::string& v) {
             c.scenario.init_speed = to_double(f, v);
         }},

        {"schedule.miss_period",
         [](ExperimentConfig& c, const std::string& f, const std::string& v) {
             c.scenario.schedule.miss_period = static_cast<int>(to_integer(f, v));
         }},
        {"schedule.miss_rect",
         [](ExperimentConfig& c, const std::string& f, const std::string& v) {
             c.scenario.schedule.miss_rect = static_cast<int>(to_integer(f, v));
         }},
        {"schedule.death_t",
         [](ExperimentConfig& c, const std::string& f, const std::string& v) {
             c.scenario.schedule.death_t = static_cast<int>(to_integer(f, v));
         }},
        {"schedule.death_count",
         [](ExperimentConfig& c, const std::string& f, const std::string& v) {
             c.scenario.schedule.death_count = static_cast<int>(to_integer(f, v));
         }},
        {"schedule.birth_t",
         [](ExperimentConfig& c, const std::string& f, const std::string& v) {
             c.scenario.schedule.birth_t = static_cast<int>(to_integer(f, v));
         }},
        {"schedule.birth_count",
         [](ExperimentConfig& c, const std::string& f, const std::string& v) {
             c.scenario.schedule.birth_count = static_cast<int>(to_integer(f, v));
         }},

        {"smc.n_init",
         [](ExperimentConfig& c, const std::string& f, const std::string& v) {
             c.smc.n_init = static_cast<int>(to_integer(f, v));
         }},
        {"smc.p_p",
         [](ExperimentConfig& c, const std::string& f, const std::string& v) {
             c.smc.p_p = static_cast<int>(to_integer(f, v));
         }},
        {"smc.p_b",
         [](ExperimentConfig& c, const std::string& f, const std::string& v) {
             c.smc.p_b = static_cast<int>(to_integer(f, v));
         }},
        {"smc.cap",
         [](ExperimentConfig& c, const std::string& f, const std::string& v) {
             c.smc.cap = static_cast<int>(to_integer(f, v));
         }},
        {"smc.roughening_scale",
         [](ExperimentConfig& c, const std::string& f, const std::string& v) {
             c.smc.roughening_scale = to_double(f, v);
         }},
        {"smc.alpha",
         [](ExperimentConfig& c, const std::string& f, const std::string& v) { c.smc.alpha = to_double(f, v); }},
        {"smc.eta", [](ExperimentConfig& c, const std::string& f, const std::string& v) { c.smc.eta = to_double(f, v); }},
        {"smc.gamma0",
         [](ExperimentConfig& c, const std::string& f, const std::string& v) { c.smc.gamma0 = to_double(f, v); }},
        {"smc.min_birth_particles",
         [](ExperimentConfig& c, const std::string& f, const std::string& v) {
             c.smc.min_birth_particles = static_cast<int>(to_integer(f, v));
         }},
        {"smc.birth_mode",
         [](ExperimentConfig& c, const std::string& f, const std::string& v) {
             c.smc.birth_mode = to_birth_mode(f, v);
         }},
        {"smc.birth_mass",
         [](ExperimentConfig& c, const std::string& f, const std::string& v) { c.smc.birth_mass = to_double(f, v); }},
        {"smc.p_s", [](ExperimentConfig& c, const std::string& f, const std::string& v) { c.smc.p_s = to_double(f, v); }},
        {"smc.init_speed",
         [](ExperimentConfig& c, const std::string& f, const std::string& v) { c.smc.init_speed = to_double(f, v); }},
        {"smc.init_turn",
         [](ExperimentConfig& c, const std::string& f, const std::string& v) { c.smc.init_turn = to_double(f, v); }},
        {"smc.resample",
         [](ExperimentConfig& c, const std::string& f, const std::string& v) { c.smc.resample = to_resample(f, v); }},
        {"smc.double_update",
         [](ExperimentConfig& c, const std::string& f, const std::string& v) { c.smc.double_update = to_bool(f, v); }},
        {"smc.diagonal_only",
         [](ExperimentConfig& c, const std::string& f, const std::string& v) { c.smc.diagonal_only = to_bool(f, v); }},

        {"kernel.delta",
         [](ExperimentConfig& c, const std::string& f, const std::string& v) { c.kernel.delta = to_double(f, v); }},
        {"kernel.warn_threshold",
         [](ExperimentConfig& c, const std::string& f, const std::string& v) {
             c.kernel.warn_threshold = to_double(f, v);
         }},
        {"kernel.max_alternations",
         [](ExperimentConfig& c, const std::string& f, const std::string& v) {
             c.kernel.max_alternations = static_cast<int>(to_integer(f, v));
         }},

        {"domains.a",
         [](ExperimentConfig& c, const std::string& f, const std::string& v) {
             auto d = c.domains.value_or(std::make_pair(0, 1));
             d.first = static_cast<int>(to_integer(f, v));
             c.domains = d;
         }},
        {"domains.b",
         [](ExperimentConfig& c, const std::string& f, const std::string& v) {
             auto d = c.domains.value_or(std::make_pair(0, 1));
             d.second = static_cast<int>(to_integer(f, v));
             c.domains = d;
         }},
    };
    return table;
}

Window square(double side) { return Window{{Rect{0.0, side, 0.0, side}}}; }

} // namespace

void ExperimentConfig::validate() const {
    if (mc_runs < 1) throw ConfigError("experiment.mc_runs", "must be >= 1");
    if (steps < 1) throw ConfigError("experiment.steps", "must be >= 1");
    if (threads < 1) throw ConfigError("experiment.threads", "must be >= 1");
    if (!(ospa_c > 0.0)) throw ConfigError("experiment.ospa_c", "must be > 0");
    if (!(ospa_p >= 1.0)) throw ConfigError("experiment.ospa_p", "must be >= 1");
    const auto& d = scenario.dynamics;
    if (!(d.tau > 0.0)) throw ConfigError("dynamics.tau", "must be > 0");
    if (d.sigma_vx < 0.0) throw ConfigError("dynamics.sigma_vx", "must be >= 0");
    if (d.sigma_vy < 0.0) throw ConfigError("dynamics.sigma_vy", "must be >= 0");
    if (d.sigma_vtheta < 0.0) throw ConfigError("dynamics.sigma_vtheta", "must be >= 0");
    const auto& s = scenario.sensor;
    if (!(s.sigma_r > 0.0)) throw ConfigError("sensor.sigma_r", "must be > 0");
    if (!(s.sigma_b > 0.0)) throw ConfigError("sensor.sigma_b", "must be > 0");
    if (s.p_d < 0.0 || s.p_d > 1.0) throw ConfigError("sensor.p_d", "must lie in [0, 1]");
    if (s.clutter_mean < 0.0) throw ConfigError("sensor.clutter_mean", "must be >= 0");
    if (s.window.rects.empty()) throw ConfigError("window.rects", "at least one rectangle is required");
    if (scenario.targets_per_rect.size() != s.window.rects.size())
        throw ConfigError("window.targets_per_rect", "needs one count per rectangle");
    for (int n : scenario.targets_per_rect)
        if (n < 0) throw ConfigError("window.targets_per_rect", "counts must be >= 0");
    const auto& sc = scenario.schedule;
    const int nrect = static_cast<int>(s.window.rects.size());
    if (sc.miss_period < 0) throw ConfigError("schedule.miss_period", "must be >= 0");
    if (sc.miss_period > 0 && (sc.miss_rect < 0 || sc.miss_rect >= nrect))
        throw ConfigError("schedule.miss_rect", "must name a window rectangle");
    if (sc.death_count < 0) throw ConfigError("schedule.death_count", "must be >= 0");
    if (sc.birth_count < 0) throw ConfigError("schedule.birth_count", "must be >= 0");
    if (smc.n_init < 1) throw ConfigError("smc.n_init", "must be >= 1");
    if (smc.p_p < 1) throw ConfigError("smc.p_p", "must be >= 1");
    if (smc.p_b < 1) throw ConfigError("smc.p_b", "must be >= 1");
    if (smc.cap < 1) throw ConfigError("smc.cap", "must be >= 1");
    if (smc.roughening_scale < 0.0) throw ConfigError("smc.roughening_scale", "must be >= 0");
    if (smc.alpha < 0.0) throw ConfigError("smc.alpha", "must be >= 0");
    if (!(smc.eta > 0.0 && smc.eta < 1.0)) throw ConfigError("smc.eta", "must lie in (0, 1)");
    if (!(smc.gamma0 > 0.0)) throw ConfigError("smc.gamma0", "must be > 0");
    if (smc.p_s < 0.0 || smc.p_s > 1.0) throw ConfigError("smc.p_s", "must lie in [0, 1]");
    if (smc.birth_mass < 0.0) throw ConfigError("smc.birth_mass", "must be >= 0");
    if (!(kernel.delta > 0.0 && kernel.delta < 1.0)) throw ConfigError("kernel.delta", "must lie in (0, 1)");
    if (domains) {
        if (domains->first < 0 || domains->first >= nrect) throw ConfigError("domains.a", "must name a rectangle");
        if (domains->second < 0 || domains->second >= nrect) throw ConfigError("domains.b", "must name a rectangle");
    }
}

ExperimentConfig parse_config(std::istream& is, ExperimentConfig base) {
    pt::ptree tree;
    try {
        pt::read_ini(is, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError("line " + std::to_string(e.line()), e.message());
    }
    const auto& table = setters();
    for (const auto& [section, body] : tree) {
        if (body.empty() && !body.data().empty()) throw ConfigError(section, "key outside of a section");
        for (const auto& [key, value] : body) {
            const std::string field = section + "." + key;
            const auto it = table.find(field);
            if (it == table.end()) throw ConfigError(field, "unknown key");
            it->second(base, field, trim(value.data()));
        }
    }
    base.validate();
    return base;
}

ExperimentConfig load_config(const std::string& path, ExperimentConfig base) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config", "cannot open '" + path + "'");
    return parse_config(in, std::move(base));
}

std::string to_string(FilterChoice f) {
    switch (f) {
    case FilterChoice::dpp:
        return "dpp";
    case FilterChoice::ppp:
        return "ppp";
    case FilterChoice::both:
        return "both";
    }
    return "dpp";
}

void write_config(std::ostream& os, const ExperimentConfig& c) {
    const auto old = os.precision(17);
    const auto& d = c.scenario.dynamics;
    const auto& s = c.scenario.sensor;
    const auto& sc = c.scenario.schedule;
    os << "[experiment]\nname = " << c.name << "\nfilter = " << to_string(c.filter) << "\nmc_runs = " << c.mc_runs
       << "\nsteps = " << c.steps << "\nseed = " << c.seed << "\nthreads = " << c.threads
       << "\noutput_dir = " << c.output_dir << "\nospa_c = " << c.ospa_c << "\nospa_p = " << c.ospa_p << '\n';
    if (!c.zeta_values.empty()) {
        os << "zeta_values = ";
        for (size_t i = 0; i < c.zeta_values.size(); ++i) os << (i ? ", " : "") << c.zeta_values[i];
        os << '\n';
    }
    os << "\n[dynamics]\ntau = " << d.tau << "\nsigma_vx = " << d.sigma_vx << "\nsigma_vy = " << d.sigma_vy
       << "\nsigma_vtheta = " << d.sigma_vtheta << "\nzeta_x = " << d.zeta_x << "\nzeta_y = " << d.zeta_y
       << "\nposition_norm = " << (d.position_norm ? "true" : "false") << '\n';
    os << "\n[sensor]\nsigma_r = " << s.sigma_r << "\nsigma_b = " << s.sigma_b << "\np_d = " << s.p_d
       << "\nclutter_mean = " << s.clutter_mean << "\nclutter_mean_late = " << c.scenario.clutter_mean_late
       << "\nclutter_switch_t = " << c.scenario.clutter_switch_t << '\n';
    os << "\n[window]\nrects = ";
    for (size_t i = 0; i < s.window.rects.size(); ++i) {
        const auto& r = s.window.rects[i];
        os << (i ? "; " : "") << r.x0 << ' ' << r.x1 << ' ' << r.y0 << ' ' << r.y1;
    }
    os << "\ntargets_per_rect = ";
    for (size_t i = 0; i < c.scenario.targets_per_rect.size(); ++i)
        os << (i ? ", " : "") << c.scenario.targets_per_rect[i];
    os << "\ninit_spread = " << c.scenario.init_spread
       << "\ninit_uniform = " << (c.scenario.init_uniform ? "true" : "false")
       << "\ninit_speed = " << c.scenario.init_speed << '\n';
    os << "\n[schedule]\nmiss_period = " << sc.miss_period << "\nmiss_rect = " << sc.miss_rect
       << "\ndeath_t = " << sc.death_t << "\ndeath_count = " << sc.death_count << "\nbirth_t = " << sc.birth_t
       << "\nbirth_count = " << sc.birth_count << '\n';
    const auto& m = c.smc;
    os << "\n[smc]\nn_init = " << m.n_init << "\np_p = " << m.p_p << "\np_b = " << m.p_b << "\ncap = " << m.cap
       << "\nroughening_scale = " << m.roughening_scale << "\nalpha = " << m.alpha << "\neta = " << m.eta
       << "\ngamma0 = " << m.gamma0 << "\nmin_birth_particles = " << m.min_birth_particles
       << "\nbirth_mode = " << (m.birth_mode == BirthMassMode::literal ? "literal" : "fixed")
       << "\nbirth_mass = " << m.birth_mass << "\np_s = " << m.p_s << "\ninit_speed = " << m.init_speed
       << "\ninit_turn = " << m.init_turn << "\nresample = " << resample_name(m.resample)
       << "\ndouble_update = " << (m.double_update ? "true" : "false")
       << "\ndiagonal_only = " << (m.diagonal_only ? "true" : "false") << '\n';
    os << "\n[kernel]\ndelta = " << c.kernel.delta << "\nwarn_threshold = " << c.kernel.warn_threshold
       << "\nmax_alternations = " << c.kernel.max_alternations << '\n';
    if (c.domains) os << "\n[domains]\na = " << c.domains->first << "\nb = " << c.domains->second << '\n';
    os.precision(old);
}

std::vector<std::string> preset_names() { return {"spooky", "death", "birth", "repulsion-bias", "good-ratio"}; }

ExperimentConfig preset(const std::string& name, bool full) {
    ExperimentConfig c;
    c.name = name;
    auto& dyn = c.scenario.dynamics;
    auto& sen = c.scenario.sensor;
    dyn.tau = 1.0;
    dyn.sigma_vx = dyn.sigma_vy = 1.0;
    dyn.sigma_vtheta = kPi;
    sen.sigma_b = kPi;
    sen.sigma_r = std::sqrt(2.0);
    c.smc.eta = 0.1;
    c.kernel.max_alternations = 0;

    if (name == "spooky") {
        const double off = 150.0 + 150.0 / std::sqrt(2.0);
        sen.window.rects = {Rect{0, 150, 0, 150}, Rect{off, off + 150, off, off + 150}};
        sen.p_d = 0.9;
        sen.clutter_mean = 5.0;
        c.scenario.schedule.miss_period = 10;
        c.scenario.schedule.miss_rect = 1;
        c.domains = std::make_pair(0, 1);
        c.filter = FilterChoice::dpp;
        c.smc.n_init = 800;
        c.smc.gamma0 = 2.0;
        c.smc.alpha = 4.0;
        c.smc.p_p = 30;
        c.smc.p_b = 10;
        if (full) {
            c.scenario.targets_per_rect = {10, 10};
            c.steps = 50;
            c.mc_runs = 100;
        } else {
            c.scenario.targets_per_rect = {3, 3};
            c.steps = 30;
            c.mc_runs = 20;
            c.scale_notes = {"targets per domain 10 -> 3", "steps 50 -> 30", "mc_runs 100 -> 20"};
        }
    } else if (name == "death") {
        sen.window = square(100.0);
        sen.p_d = 0.95;
        sen.clutter_mean = 1.0;
        c.scenario.clutter_mean_late = 0.3;
        c.scenario.clutter_switch_t = 9;
        c.scenario.targets_per_rect = {15};
        c.scenario.init_spread = 0.2;
        c.scenario.schedule.death_t = 9;
        c.scenario.schedule.death_count = 10;
        c.filter = FilterChoice::both;
        c.steps = 16;
        c.smc.gamma0 = 0.2;
        c.smc.alpha = 4.0;
        if (full) {
            c.smc.n_init = 6000;
            c.smc.p_p = 50;
            c.smc.p_b = 40;
            c.mc_runs = 300;
        } else {
            c.smc.n_init = 600;
            c.smc.p_p = 20;
            c.smc.p_b = 10;
            c.mc_runs = 5;
            c.scale_notes = {"n_init 6000 -> 600", "P_p 50 -> 20", "P_b 40 -> 10", "mc_runs 300 -> 5"};
        }
    } else if (name == "birth") {
        sen.window = square(100.0);
        sen.p_d = 0.9;
        sen.clutter_mean = 0.0;
        c.scenario.clutter_mean_late = 5.0;
        c.scenario.clutter_switch_t = 9;
        c.scenario.targets_per_rect = {1};
        c.scenario.init_spread = 0.2;
        c.scenario.schedule.birth_t = 10;
        c.scenario.schedule.birth_count = 9;
        c.filter = FilterChoice::both;
        c.steps = 45;
        c.smc.n_init = 300;
        c.smc.gamma0 = 0.2;
        c.smc.alpha = 4.0;
        c.smc.p_p = 40;
        c.smc.p_b = 9;
        if (full) {
            c.mc_runs = 400;
        } else {
            c.mc_runs = 5;
            c.scale_notes = {"mc_runs 400 -> 5"};
        }
    } else if (name == "repulsion-bias") {
        sen.window = square(200.0);
        sen.sigma_r = 2.0 * std::sqrt(2.0);
        sen.p_d = 0.9;
        sen.clutter_mean = 1.0;
        c.scenario.init_uniform = true;
        c.filter = FilterChoice::ppp;
        c.zeta_values = {0.0, 4.0, 8.0};
        c.steps = 20;
        c.smc.n_init = 1000;
        c.smc.p_p = 100;
        c.smc.p_b = 100;
        c.smc.gamma0 = 1.0;
        c.smc.birth_mode = BirthMassMode::fixed;
        c.smc.birth_mass = 0.2;
        if (full) {
            c.scenario.targets_per_rect = {10};
            c.mc_runs = 200;
        } else {
            c.scenario.targets_per_rect = {4};
            c.mc_runs = 30;
            c.scale_notes = {"targets 10 -> 4", "mc_runs 200 -> 30"};
        }
    } else if (name == "good-ratio") {
        sen.window = square(2000.0);
        sen.sigma_r = 2.0 * std::sqrt(2.0);
        sen.p_d = 1.0;
        sen.clutter_mean = 0.0;
        c.scenario.targets_per_rect = {3};
        c.scenario.init_spread = 0.015;
        c.filter = FilterChoice::ppp;
        c.zeta_values = {0.0, 10.0, 20.0, 30.0};
        c.steps = 15;
        c.smc.n_init = 1000;
        c.smc.p_p = 100;
        c.smc.p_b = 100;
        c.smc.gamma0 = 1.0;
        c.smc.birth_mode = BirthMassMode::fixed;
        c.smc.birth_mass = 0.2;
        if (full) {
            c.mc_runs = 100;
        } else {
            c.mc_runs = 10;
            c.scale_notes = {"mc_runs 100 -> 10"};
        }
    } else {
        throw UnknownPreset("unknown preset '" + name + "'");
    }
    c.output_dir = "out/" + name;
    c.validate();
    return c;
}

} // namespace dppphd
