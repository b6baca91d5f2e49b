// SPDX-License-Identifier: Apache-2.0
//
// geochan: geometry-based radio channel estimation, prediction, and fusion
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
// ------------------------------------------------------------------------

#include "geochan/scenario.hpp"
#include "geochan/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace geochan {

bool segment_intersects_box(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                            const BoxObstacle& box) {
    double t_enter = 0.0;
    double t_exit = 1.0;
    const Eigen::Vector3d d = b - a;
    for (int k = 0; k < 3; ++k) {
        if (std::abs(d[k]) < 1e-15) {
            if (a[k] < box.lo[k] || a[k] > box.hi[k])
                return false;
            continue;
        }
        double t0 = (box.lo[k] - a[k]) / d[k];
        double t1 = (box.hi[k] - a[k]) / d[k];
        if (t0 > t1)
            std::swap(t0, t1);
        t_enter = std::max(t_enter, t0);
        t_exit = std::min(t_exit, t1);
        if (t_enter > t_exit)
            return false;
    }
    return true;
}

double ScenarioConfig::spacing() const {
    return array_spacing > 0.0 ? array_spacing : 0.5 * 299792458.0 / fc;
}

void ScenarioConfig::validate() const {
    auto fail = [](const std::string& field, const std::string& msg) {
        throw std::invalid_argument("config: " + field + ": " + msg);
    };

    if (fc <= 0.0)
        fail("fc", "must be > 0");
    if (bandwidth < 0.0)
        fail("bandwidth", "must be >= 0");
    if (n_freq < 1)
        fail("n_freq", "must be >= 1");
    if (inference_n_freq < 1 || n_freq % inference_n_freq != 0)
        fail("inference_n_freq", "must divide n_freq");
    if (array_rows < 1 || array_cols < 1)
        fail("array_rows/array_cols", "must be >= 1");
    if (array_spacing < 0.0)
        fail("array_spacing", "must be >= 0 (0 selects half a wavelength)");
    if (anchors.empty())
        fail("anchor", "need at least one anchor");
    for (std::size_t j = 0; j < anchors.size(); ++j) {
        const Eigen::Matrix3d& r = anchors[j].rotation;
        if ((r.transpose() * r - Eigen::Matrix3d::Identity()).norm() > 1e-6)
            fail("anchor", "rotation " + std::to_string(j) + " is not orthogonal");
    }
    for (std::size_t s = 0; s < mvas_true.size(); ++s)
        if (mvas_true[s].position.norm() < kMvaDegeneracyThreshold)
            fail("mva", "surface " + std::to_string(s) + " mirror point is degenerate");
    const std::size_t n_paths = mvas_true.size() * mvas_true.size() + 1;
    if (!path_mask.empty() && path_mask.size() != n_paths)
        fail("path_mask", "length must be S^2+1 = " + std::to_string(n_paths));
    if (reference_gain <= 0.0)
        fail("reference_gain", "must be > 0");
    if (reflection_loss <= 0.0 || reflection_loss > 1.0)
        fail("reflection_loss", "must be in (0, 1]");
    if (obstacle && (obstacle->lo.array() > obstacle->hi.array()).any())
        fail("obstacle", "box min exceeds max");
    if (olos_steps && (olos_steps->first < 1 || olos_steps->second < olos_steps->first))
        fail("olos_steps", "window must satisfy 1 <= first <= last");
    if (waypoints.empty())
        fail("waypoint", "need at least one waypoint");
    if (speed < 0.0)
        fail("speed", "must be >= 0");
    if (n_steps < 1)
        fail("n_steps", "must be >= 1");
    if (n_particles < 1)
        fail("n_particles", "must be >= 1");
    if (ess_threshold < 0.0 || ess_threshold > 1.0)
        fail("ess_threshold", "must be in [0, 1]");
    if (jitter_scale <= 0.0)
        fail("jitter_scale", "must be > 0");
    if (motion.dt <= 0.0)
        fail("dt", "must be > 0");
    if (motion.sigma_p < 0.0 || motion.sigma_v < 0.0 || motion.sigma_mva < 0.0)
        fail("sigma_p/sigma_v/sigma_mva", "must be >= 0");
    if ((init_pos_min.array() > init_pos_max.array()).any())
        fail("init_pos_min/init_pos_max", "box min exceeds max");
    if ((init_vel_min.array() > init_vel_max.array()).any())
        fail("init_vel_min/init_vel_max", "box min exceeds max");
    if (init_mva_min.size() != mvas_true.size() || init_mva_max.size() != mvas_true.size())
        fail("init_mva_min/init_mva_max", "need one box per surface");
    for (std::size_t s = 0; s < init_mva_min.size(); ++s)
        if ((init_mva_min[s].array() > init_mva_max[s].array()).any())
            fail("init_mva_min/init_mva_max",
                 "box min exceeds max for surface " + std::to_string(s));
    if (runs < 1)
        fail("runs", "must be >= 1");
    if (convergence_cut < 0.0 || convergence_cut >= 1.0)
        fail("convergence_cut", "must be in [0, 1)");
    const Eigen::Index n_samples =
        static_cast<Eigen::Index>(array_rows) * array_cols * inference_n_freq;
    if (n_samples <= static_cast<Eigen::Index>(n_paths))
        fail("inference_n_freq", "samples per anchor must exceed the path count");
}

Scene ScenarioConfig::scene() const {
    Scene s;
    s.radio = make_radio(fc, bandwidth, n_freq);
    s.anchors = anchors;
    s.antenna_template = ura_template(array_rows, array_cols, spacing());
    s.mvas = mvas_true;
    s.path_enabled = path_mask;
    return s;
}

Scene ScenarioConfig::inference_scene() const {
    Scene s = scene();
    s.radio = subset_radio(s.radio, inference_n_freq);
    return s;
}

std::vector<SceneState> ScenarioConfig::trajectory() const {
    // Arc-length positions along the waypoint polyline, clamped at its end.
    std::vector<double> cumulative{0.0};
    for (std::size_t i = 1; i < waypoints.size(); ++i)
        cumulative.push_back(cumulative.back() + (waypoints[i] - waypoints[i - 1]).norm());
    const double total = cumulative.back();

    auto at_arc = [&](double s) -> Eigen::Vector3d {
        if (waypoints.size() == 1 || s >= total)
            return waypoints.back();
        std::size_t i = 1;
        while (cumulative[i] < s)
            ++i;
        const double seg = cumulative[i] - cumulative[i - 1];
        const double t = seg > 0.0 ? (s - cumulative[i - 1]) / seg : 0.0;
        return waypoints[i - 1] + t * (waypoints[i] - waypoints[i - 1]);
    };

    Eigen::VectorXd mva_stack(3 * static_cast<Eigen::Index>(mvas_true.size()));
    for (std::size_t s = 0; s < mvas_true.size(); ++s)
        mva_stack.segment<3>(3 * static_cast<Eigen::Index>(s)) = mvas_true[s].position;

    std::vector<SceneState> states(static_cast<std::size_t>(n_steps));
    for (int n = 0; n < n_steps; ++n) {
        states[static_cast<std::size_t>(n)].position = at_arc(n * speed * motion.dt);
        states[static_cast<std::size_t>(n)].mvas = mva_stack;
    }
    // Forward differences, so a noise-free motion step lands exactly on
    // the next trajectory point inside a segment; the last step keeps the
    // previous step's velocity.
    if (n_steps >= 2) {
        for (int n = 0; n < n_steps; ++n) {
            const std::size_t a = static_cast<std::size_t>(std::min(n, n_steps - 2));
            states[static_cast<std::size_t>(n)].velocity =
                (states[a + 1].position.head<2>() - states[a].position.head<2>()) / motion.dt;
        }
    }
    return states;
}

AmplitudeModel ScenarioConfig::amplitude_model(int step_1based, int anchor_id) const {
    if (anchor_id < 0 || anchor_id >= static_cast<int>(anchors.size()))
        throw std::invalid_argument("amplitude_model: anchor_id out of range");

    AmplitudeModel m;
    m.reference_gain = reference_gain;
    m.reflection_loss = reflection_loss;

    const bool window_blocked =
        olos_steps && step_1based >= olos_steps->first && step_1based <= olos_steps->second;
    if (window_blocked) {
        m.los_blocked = [](const Eigen::Vector3d&) { return true; };
    } else if (obstacle) {
        const BoxObstacle box = *obstacle;
        const Eigen::Vector3d anchor_center = anchors[static_cast<std::size_t>(anchor_id)].center;
        m.los_blocked = [box, anchor_center](const Eigen::Vector3d& agent) {
            return segment_intersects_box(agent, anchor_center, box);
        };
    }
    return m;
}

SceneState ScenarioConfig::bounds_min() const {
    SceneState s;
    s.position = init_pos_min;
    s.velocity = init_vel_min;
    s.mvas.resize(3 * static_cast<Eigen::Index>(init_mva_min.size()));
    for (std::size_t i = 0; i < init_mva_min.size(); ++i)
        s.mvas.segment<3>(3 * static_cast<Eigen::Index>(i)) = init_mva_min[i];
    return s;
}

SceneState ScenarioConfig::bounds_max() const {
    SceneState s;
    s.position = init_pos_max;
    s.velocity = init_vel_max;
    s.mvas.resize(3 * static_cast<Eigen::Index>(init_mva_max.size()));
    for (std::size_t i = 0; i < init_mva_max.size(); ++i)
        s.mvas.segment<3>(3 * static_cast<Eigen::Index>(i)) = init_mva_max[i];
    return s;
}

static Eigen::Matrix3d mount_rotation(double yaw, double tilt) {
    return (Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()) *
            Eigen::AngleAxisd(tilt, Eigen::Vector3d::UnitX()))
        .toRotationMatrix();
}

ScenarioConfig desk_scenario() {
    ScenarioConfig c;
    c.fc = 6.175e9;
    c.bandwidth = 500e6;
    c.n_freq = 4;
    c.inference_n_freq = 4;
    c.array_rows = 4;
    c.array_cols = 4;

    c.anchors = {
        {{3.0, 1.5, 2.4}, mount_rotation(3.0, 0.4)},
        {{-3.0, 1.2, 2.2}, mount_rotation(0.5, 0.5)},
        {{0.0, -2.6, 2.5}, mount_rotation(-0.7, 0.3)},
        {{2.6, -2.0, 1.9}, mount_rotation(2.0, 0.6)},
        {{-2.4, -1.8, 2.1}, mount_rotation(-2.2, 0.45)},
    };
    // One wall: the plane y = 2, with a strongly reflective finish.
    c.mvas_true = {{Eigen::Vector3d(0.0, 4.0, 0.0)}};
    c.reflection_loss = 0.7;

    c.waypoints = {
        {-1.5, -1.0, 1.0},
        {1.5, -1.0, 1.0},
        {1.5, 0.8, 1.0},
        {-1.5, 0.8, 1.0},
        {-1.5, -1.0, 1.0},
    };
    c.speed = 0.12;
    c.n_steps = 50;
    c.snr_at_start_db = 0.0;

    c.n_particles = 500;
    c.init_pos_min = {-2.25, -1.75, 0.4};
    c.init_pos_max = {-0.75, -0.25, 1.6};
    c.init_vel_min = {-0.25, -0.25};
    c.init_vel_max = {0.25, 0.25};
    c.init_mva_min = {{-0.5, 3.5, -0.5}};
    c.init_mva_max = {{0.5, 4.5, 0.5}};
    return c;
}

ScenarioConfig hall_scenario() {
    ScenarioConfig c;
    c.fc = 6.175e9;
    c.bandwidth = 500e6;
    c.n_freq = 6;
    c.inference_n_freq = 6;
    c.array_rows = 8;
    c.array_cols = 8;

    c.anchors = {
        {{-4.5, -2.5, 2.5}, mount_rotation(0.0, 0.40)},
        {{-2.5, -2.8, 2.3}, mount_rotation(0.8, 0.45)},
        {{0.0, -2.9, 2.6}, mount_rotation(1.6, 0.50)},
        {{2.5, -2.8, 2.4}, mount_rotation(2.4, 0.55)},
        {{4.5, -2.5, 2.5}, mount_rotation(3.2, 0.60)},
        {{4.8, -1.0, 2.2}, mount_rotation(4.0, 0.40)},
        {{4.8, 1.0, 2.6}, mount_rotation(4.8, 0.45)},
        {{4.5, 2.5, 2.4}, mount_rotation(5.6, 0.50)},
        {{2.5, 2.8, 2.3}, mount_rotation(0.4, 0.55)},
        {{0.0, 2.9, 2.5}, mount_rotation(1.2, 0.60)},
        {{-2.5, 2.8, 2.6}, mount_rotation(2.0, 0.40)},
        {{-4.5, 2.5, 2.2}, mount_rotation(2.8, 0.45)},
        {{-4.8, 1.0, 2.5}, mount_rotation(3.6, 0.50)},
        {{-4.8, -1.0, 2.3}, mount_rotation(4.4, 0.55)},
        {{0.0, 0.0, 2.9}, mount_rotation(5.2, 0.60)},
    };
    // Two walls: the planes y = 3 and x = 5.
    c.mvas_true = {{Eigen::Vector3d(0.0, 6.0, 0.0)}, {Eigen::Vector3d(10.0, 0.0, 0.0)}};

    c.waypoints = {
        {-3.0, -1.5, 1.0},
        {3.0, -1.5, 1.0},
        {3.0, 1.5, 1.0},
        {-3.0, 1.5, 1.0},
        {-3.0, -1.5, 1.0},
    };
    c.speed = 0.12;
    c.n_steps = 50;
    c.snr_at_start_db = -6.0;

    c.n_particles = 1000;
    c.init_pos_min = {-4.0, -2.5, 0.2};
    c.init_pos_max = {-2.0, -0.5, 1.8};
    c.init_vel_min = {-0.25, -0.25};
    c.init_vel_max = {0.25, 0.25};
    c.init_mva_min = {{-0.5, 5.5, -0.5}, {9.5, -0.5, -0.5}};
    c.init_mva_max = {{0.5, 6.5, 0.5}, {10.5, 0.5, 0.5}};
    return c;
}

// ---- key-value config text ----

namespace {

struct Parser {
    std::string origin;
    int line_no = 0;

    [[noreturn]] void fail(const std::string& msg) const {
        throw std::invalid_argument(origin + ":" + std::to_string(line_no) + ": " + msg);
    }

    std::vector<double> numbers(const std::string& text, std::size_t want) const {
        std::istringstream ss(text);
        std::vector<double> out;
        double v;
        while (ss >> v)
            out.push_back(v);
        std::string rest;
        if (ss.clear(), ss >> rest)
            fail("unexpected token '" + rest + "'");
        if (want != 0 && out.size() != want)
            fail("expected " + std::to_string(want) + " numbers, got " +
                 std::to_string(out.size()));
        return out;
    }

    double number(const std::string& text) const { return numbers(text, 1)[0]; }

    std::uint64_t integer(const std::string& text) const {
        try {
            std::size_t pos = 0;
            const std::uint64_t v = std::stoull(text, &pos, 0);
            while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos])))
                ++pos;
            if (pos != text.size())
                fail("trailing characters after integer");
            return v;
        } catch (const std::invalid_argument&) {
            fail("expected an integer");
        } catch (const std::out_of_range&) {
            fail("integer out of range");
        }
    }
};

} // namespace

ScenarioConfig parse_config(std::istream& in, const std::string& origin) {
    ScenarioConfig c;
    c.anchors.clear();
    c.mvas_true.clear();
    c.waypoints.clear();
    c.init_mva_min.clear();
    c.init_mva_max.clear();

    Parser p{origin};
    std::string line;
    while (std::getline(in, line)) {
        ++p.line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        const std::size_t eq = line.find('=');
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        if (eq == std::string::npos)
            p.fail("expected 'key = value'");

        std::string key = line.substr(0, eq);
        std::string value = line.substr(eq + 1);
        auto trim = [](std::string& s) {
            const std::size_t a = s.find_first_not_of(" \t\r");
            const std::size_t b = s.find_last_not_of(" \t\r");
            s = a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        trim(key);
        trim(value);

        if (key == "fc") c.fc = p.number(value);
        else if (key == "bandwidth") c.bandwidth = p.number(value);
        else if (key == "n_freq") c.n_freq = static_cast<int>(p.number(value));
        else if (key == "inference_n_freq") c.inference_n_freq = static_cast<int>(p.number(value));
        else if (key == "array_rows") c.array_rows = static_cast<int>(p.number(value));
        else if (key == "array_cols") c.array_cols = static_cast<int>(p.number(value));
        else if (key == "array_spacing") c.array_spacing = p.number(value);
        else if (key == "anchor") {
            const std::vector<double> v = p.numbers(value, 12);
            PhysicalAnchor a;
            a.center = Eigen::Vector3d(v[0], v[1], v[2]);
            a.rotation << v[3], v[4], v[5], v[6], v[7], v[8], v[9], v[10], v[11];
            c.anchors.push_back(a);
        } else if (key == "mva") {
            const std::vector<double> v = p.numbers(value, 3);
            c.mvas_true.push_back({Eigen::Vector3d(v[0], v[1], v[2])});
        } else if (key == "path_mask") {
            const std::vector<double> v = p.numbers(value, 0);
            c.path_mask.clear();
            for (double x : v)
                c.path_mask.push_back(x != 0.0);
        } else if (key == "reference_gain") c.reference_gain = p.number(value);
        else if (key == "reflection_loss") c.reflection_loss = p.number(value);
        else if (key == "obstacle") {
            const std::vector<double> v = p.numbers(value, 6);
            c.obstacle = BoxObstacle{{v[0], v[1], v[2]}, {v[3], v[4], v[5]}};
        } else if (key == "olos_steps") {
            const std::vector<double> v = p.numbers(value, 2);
            c.olos_steps = {static_cast<int>(v[0]), static_cast<int>(v[1])};
        } else if (key == "waypoint") {
            const std::vector<double> v = p.numbers(value, 3);
            c.waypoints.emplace_back(v[0], v[1], v[2]);
        } else if (key == "speed") c.speed = p.number(value);
        else if (key == "n_steps") c.n_steps = static_cast<int>(p.number(value));
        else if (key == "snr_at_start_db") c.snr_at_start_db = p.number(value);
        else if (key == "n_particles") c.n_particles = static_cast<int>(p.number(value));
        else if (key == "ess_threshold") c.ess_threshold = p.number(value);
        else if (key == "jitter_scale") c.jitter_scale = p.number(value);
        else if (key == "dt") c.motion.dt = p.number(value);
        else if (key == "sigma_p") c.motion.sigma_p = p.number(value);
        else if (key == "sigma_v") c.motion.sigma_v = p.number(value);
        else if (key == "sigma_mva") c.motion.sigma_mva = p.number(value);
        else if (key == "init_pos_min") {
            const std::vector<double> v = p.numbers(value, 3);
            c.init_pos_min = Eigen::Vector3d(v[0], v[1], v[2]);
        } else if (key == "init_pos_max") {
            const std::vector<double> v = p.numbers(value, 3);
            c.init_pos_max = Eigen::Vector3d(v[0], v[1], v[2]);
        } else if (key == "init_vel_min") {
            const std::vector<double> v = p.numbers(value, 2);
            c.init_vel_min = Eigen::Vector2d(v[0], v[1]);
        } else if (key == "init_vel_max") {
            const std::vector<double> v = p.numbers(value, 2);
            c.init_vel_max = Eigen::Vector2d(v[0], v[1]);
        } else if (key == "init_mva_min") {
            const std::vector<double> v = p.numbers(value, 3);
            c.init_mva_min.emplace_back(v[0], v[1], v[2]);
        } else if (key == "init_mva_max") {
            const std::vector<double> v = p.numbers(value, 3);
            c.init_mva_max.emplace_back(v[0], v[1], v[2]);
        } else if (key == "seed") c.seed = p.integer(value);
        else if (key == "bf_seed") c.bf_seed = p.integer(value);
        else if (key == "runs") c.runs = static_cast<int>(p.number(value));
        else if (key == "convergence_cut") c.convergence_cut = p.number(value);
        else p.fail("unknown key '" + key + "'");
    }
    c.validate();
    return c;
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("load_config: cannot open " + path);
    return parse_config(in, path);
}

void save_config(const ScenarioConfig& config, std::ostream& out) {
    auto num = [](double v) { return format_double(v); };
    auto vec = [&](const auto& v) {
        std::string s;
        for (Eigen::Index i = 0; i < v.size(); ++i)
            s += (i ? " " : "") + format_double(v[i]);
        return s;
    };

    out << "fc = " << num(config.fc) << "\n";
    out << "bandwidth = " << num(config.bandwidth) << "\n";
    out << "n_freq = " << config.n_freq << "\n";
    out << "inference_n_freq = " << config.inference_n_freq << "\n";
    out << "array_rows = " << config.array_rows << "\n";
    out << "array_cols = " << config.array_cols << "\n";
    out << "array_spacing = " << num(config.array_spacing) << "\n";
    for (const PhysicalAnchor& a : config.anchors) {
        out << "anchor = " << vec(a.center);
        for (int r = 0; r < 3; ++r)
            for (int cidx = 0; cidx < 3; ++cidx)
                out << " " << num(a.rotation(r, cidx));
        out << "\n";
    }
    for (const MvaPoint& m : config.mvas_true)
        out << "mva = " << vec(m.position) << "\n";
    if (!config.path_mask.empty()) {
        out << "path_mask =";
        for (bool b : config.path_mask)
            out << " " << (b ? 1 : 0);
        out << "\n";
    }
    out << "reference_gain = " << num(config.reference_gain) << "\n";
    out << "reflection_loss = " << num(config.reflection_loss) << "\n";
    if (config.obstacle)
        out << "obstacle = " << vec(config.obstacle->lo) << " " << vec(config.obstacle->hi)
            << "\n";
    if (config.olos_steps)
        out << "olos_steps = " << config.olos_steps->first << " " << config.olos_steps->second
            << "\n";
    for (const Eigen::Vector3d& w : config.waypoints)
        out << "waypoint = " << vec(w) << "\n";
    out << "speed = " << num(config.speed) << "\n";
    out << "n_steps = " << config.n_steps << "\n";
    out << "snr_at_start_db = " << num(config.snr_at_start_db) << "\n";
    out << "n_particles = " << config.n_particles << "\n";
    out << "ess_threshold = " << num(config.ess_threshold) << "\n";
    out << "jitter_scale = " << num(config.jitter_scale) << "\n";
    out << "dt = " << num(config.motion.dt) << "\n";
    out << "sigma_p = " << num(config.motion.sigma_p) << "\n";
    out << "sigma_v = " << num(config.motion.sigma_v) << "\n";
    out << "sigma_mva = " << num(config.motion.sigma_mva) << "\n";
    out << "init_pos_min = " << vec(config.init_pos_min) << "\n";
    out << "init_pos_max = " << vec(config.init_pos_max) << "\n";
    out << "init_vel_min = " << vec(config.init_vel_min) << "\n";
    out << "init_vel_max = " << vec(config.init_vel_max) << "\n";
    for (const Eigen::Vector3d& v : config.init_mva_min)
        out << "init_mva_min = " << vec(v) << "\n";
    for (const Eigen::Vector3d& v : config.init_mva_max)
        out << "init_mva_max = " << vec(v) << "\n";
    out << "seed = " << config.seed << "\n";
    out << "bf_seed = " << config.bf_seed << "\n";
    out << "runs = " << config.runs << "\n";
    out << "convergence_cut = " << num(config.convergence_cut) << "\n";
}

} // namespace geochan
