#include "tunnelpilot/config.hpp"

#include <fstream>
#include <stdexcept>

namespace tunnelpilot {

namespace {

using nlohmann::json;

Vec3 vec3_from(const json& j, const Vec3& fallback) {
    if (!j.is_array() || j.size() != 3) {
        return fallback;
    }
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json vec3_to(const Vec3& v) {
    return json::array({v.x(), v.y(), v.z()});
}

template <typename T>
void maybe(const json& j, const char* key, T& field) {
    if (j.contains(key)) {
        field = j.at(key).get<T>();
    }
}

void maybe_vec(const json& j, const char* key, Vec3& field) {
    if (j.contains(key)) {
        field = vec3_from(j.at(key), field);
    }
}

void read_plant(const json& j, PlantParams& p) {
    maybe(j, "gravity", p.gravity);
    maybe(j, "attitude_tau", p.attitude_tau);
    maybe(j, "attitude_gain", p.attitude_gain);
    maybe_vec(j, "drag", p.drag);
    maybe(j, "yaw_rate_tau", p.yaw_rate_tau);
}

void read_yaw_pd(const json& j, YawPdParams& p) {
    maybe(j, "kp", p.kp);
    maybe(j, "kd", p.kd);
    maybe(j, "max_rate", p.max_rate);
}

void read_nmpc(const json& j, NmpcConfig& c) {
    maybe(j, "horizon", c.horizon);
    maybe(j, "dt", c.dt);
    maybe(j, "max_outer_iters", c.max_outer_iters);
    maybe(j, "max_inner_iters", c.max_inner_iters);
    maybe(j, "penalty_initial", c.penalty_initial);
    maybe(j, "rate_tolerance", c.rate_tolerance);
    maybe(j, "step_tolerance", c.step_tolerance);
}

void read_weights(const json& j, NmpcWeights& w) {
    if (j.contains("q_x")) {
        const auto& arr = j.at("q_x");
        if (arr.is_array() && arr.size() == 8) {
            for (int i = 0; i < 8; ++i) {
                w.q_x(i) = arr[i].get<double>();
            }
        }
    }
    maybe_vec(j, "q_u", w.q_u);
    maybe_vec(j, "q_du", w.q_du);
    maybe(j, "q_p_min", w.q_p_min);
    maybe(j, "q_p_max", w.q_p_max);
    maybe(j, "c", w.c);
}

void read_bounds(const json& j, InputBounds& b) {
    maybe_vec(j, "u_min", b.u_min);
    maybe_vec(j, "u_max", b.u_max);
    maybe(j, "d_roll_max", b.d_roll_max);
    maybe(j, "d_pitch_max", b.d_pitch_max);
}

void read_apf(const json& j, ApfParams& p) {
    maybe(j, "r_influence", p.r_influence);
    maybe(j, "r_critical", p.r_critical);
    maybe_vec(j, "gain", p.gain);
    maybe(j, "critical_gain", p.critical_gain);
    maybe(j, "dust_count", p.dust_count);
    maybe(j, "f_max", p.f_max);
    maybe(j, "df_max", p.df_max);
}

void read_dphr(const json& j, DphrParams& p) {
    maybe(j, "n_clusters", p.n_clusters);
    maybe(j, "kmeans_iters", p.kmeans_iters);
    maybe(j, "close_kernel", p.close_kernel);
    maybe(j, "yaw_gain", p.yaw_gain);
    maybe(j, "max_yaw_rate", p.max_yaw_rate);
    maybe(j, "max_width", p.max_width);
    maybe(j, "max_height", p.max_height);
    maybe(j, "min_depth_contrast", p.min_depth_contrast);
    maybe(j, "invalid_decay", p.invalid_decay);
}

void read_localizer(const json& j, LocalizerParams& p) {
    maybe(j, "confidence_threshold", p.confidence_threshold);
    maybe(j, "range_gate", p.range_gate);
    maybe(j, "quiet_window", p.quiet_window);
    maybe(j, "cluster_radius", p.cluster_radius);
    maybe(j, "merge_radius", p.merge_radius);
    maybe(j, "min_cluster_support", p.min_cluster_support);
    if (j.contains("size_priors")) {
        p.size_priors.clear();
        for (const auto& [key, val] : j.at("size_priors").items()) {
            p.size_priors[std::stoi(key)] = {val[0].get<double>(), val[1].get<double>()};
        }
    }
}

void read_mission(const json& j, MissionParams& p) {
    maybe(j, "t_reference", p.t_reference);
    maybe(j, "altitude_setpoint", p.altitude_setpoint);
    maybe(j, "carrot_distance", p.carrot_distance);
    maybe(j, "crumb_spacing", p.crumb_spacing);
    maybe(j, "arrival_radius", p.arrival_radius);
    maybe(j, "takeoff_rate", p.takeoff_rate);
    maybe(j, "land_rate", p.land_rate);
    maybe(j, "hover_settle", p.hover_settle);
    maybe(j, "altitude_tolerance", p.altitude_tolerance);
    maybe(j, "touchdown_height", p.touchdown_height);
}

void read_lidar(const json& j, LidarConfig& c) {
    maybe(j, "rings", c.rings);
    maybe(j, "vertical_fov_deg", c.vertical_fov_deg);
    maybe(j, "azimuth_steps", c.azimuth_steps);
    maybe(j, "max_range", c.max_range);
    maybe(j, "min_range", c.min_range);
    maybe(j, "rate_hz", c.rate_hz);
    maybe(j, "noise_sigma", c.noise_sigma);
    maybe(j, "dust_rate", c.dust_rate);
    maybe(j, "dust_near", c.dust_near);
    maybe(j, "dust_far", c.dust_far);
}

void read_depth_cam(const json& j, DepthCamConfig& c) {
    maybe(j, "width", c.width);
    maybe(j, "height", c.height);
    maybe(j, "hfov_deg", c.hfov_deg);
    maybe(j, "vfov_deg", c.vfov_deg);
    maybe(j, "max_range", c.max_range);
    maybe(j, "rate_hz", c.rate_hz);
    maybe(j, "noise_sigma", c.noise_sigma);
    maybe_vec(j, "mount_offset", c.mount_offset);
}

void read_beam(const json& j, BeamConfig& c) {
    maybe(j, "max_range", c.max_range);
    maybe(j, "rate_hz", c.rate_hz);
    maybe(j, "noise_sigma", c.noise_sigma);
}

void read_detection(const json& j, DetectionModelConfig& c) {
    maybe(j, "p_detect", c.p_detect);
    maybe(j, "fade_start", c.fade_start);
    maybe(j, "max_range", c.max_range);
    maybe(j, "min_range", c.min_range);
    maybe(j, "pixel_jitter", c.pixel_jitter);
    maybe(j, "confidence_min", c.confidence_min);
    maybe(j, "confidence_max", c.confidence_max);
    maybe(j, "fp_rate", c.fp_rate);
    maybe(j, "fp_inband_fraction", c.fp_inband_fraction);
}

}  // namespace

NmpcWeights RunConfig::resolved_weights() const {
    NmpcWeights w = weights;
    if (profile == "fast") {
        w.q_p_min *= fast_weight_scale;
        w.q_p_max *= fast_weight_scale;
        w.set_position_weight(w.q_p_max);
    }
    return w;
}

void apply_json(const nlohmann::json& j, RunConfig& cfg) {
    maybe(j, "world_preset", cfg.world_preset);
    maybe(j, "seed", cfg.seed);
    maybe(j, "profile", cfg.profile);
    maybe(j, "fast_weight_scale", cfg.fast_weight_scale);
    maybe(j, "t_reference", cfg.t_reference);
    maybe(j, "altitude_setpoint", cfg.altitude_setpoint);
    maybe(j, "max_sim_time", cfg.max_sim_time);
    maybe(j, "stop_at_time", cfg.stop_at_time);
    maybe(j, "initial_yaw_jitter", cfg.initial_yaw_jitter);
    maybe(j, "initial_lateral_jitter", cfg.initial_lateral_jitter);
    maybe(j, "apf_max_points", cfg.apf_max_points);
    maybe(j, "out_dir", cfg.out_dir);
    maybe(j, "write_trace", cfg.write_trace);
    maybe(j, "dphr_debug_dump", cfg.dphr_debug_dump);

    if (j.contains("plant")) read_plant(j.at("plant"), cfg.plant);
    if (j.contains("yaw_pd")) read_yaw_pd(j.at("yaw_pd"), cfg.yaw_pd);
    if (j.contains("nmpc")) read_nmpc(j.at("nmpc"), cfg.nmpc);
    if (j.contains("weights")) read_weights(j.at("weights"), cfg.weights);
    if (j.contains("bounds")) read_bounds(j.at("bounds"), cfg.bounds);
    if (j.contains("apf")) read_apf(j.at("apf"), cfg.apf);
    if (j.contains("dphr")) read_dphr(j.at("dphr"), cfg.dphr);
    if (j.contains("localizer")) read_localizer(j.at("localizer"), cfg.localizer);
    if (j.contains("mission")) read_mission(j.at("mission"), cfg.mission);
    if (j.contains("lidar")) read_lidar(j.at("lidar"), cfg.rig.lidar);
    if (j.contains("depth_cam")) read_depth_cam(j.at("depth_cam"), cfg.rig.depth_cam);
    if (j.contains("single_beam")) read_beam(j.at("single_beam"), cfg.rig.single_beam);
    if (j.contains("detection")) read_detection(j.at("detection"), cfg.detection);
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open config file: " + path);
    }
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw std::runtime_error("config parse error in " + path + ": " + e.what());
    }
    RunConfig cfg;
    apply_json(j, cfg);
    return cfg;
}

nlohmann::json config_to_json(const RunConfig& cfg) {
    json j;
    j["world_preset"] = cfg.world_preset;
    j["seed"] = cfg.seed;
    j["profile"] = cfg.profile;
    j["fast_weight_scale"] = cfg.fast_weight_scale;
    j["t_reference"] = cfg.t_reference;
    j["altitude_setpoint"] = cfg.altitude_setpoint;
    j["max_sim_time"] = cfg.max_sim_time;
    j["stop_at_time"] = cfg.stop_at_time;
    j["initial_yaw_jitter"] = cfg.initial_yaw_jitter;
    j["initial_lateral_jitter"] = cfg.initial_lateral_jitter;
    j["apf_max_points"] = cfg.apf_max_points;
    j["out_dir"] = cfg.out_dir;
    j["write_trace"] = cfg.write_trace;
    j["dphr_debug_dump"] = cfg.dphr_debug_dump;

    j["plant"] = {{"gravity", cfg.plant.gravity},
                  {"attitude_tau", cfg.plant.attitude_tau},
                  {"attitude_gain", cfg.plant.attitude_gain},
                  {"drag", vec3_to(cfg.plant.drag)},
                  {"yaw_rate_tau", cfg.plant.yaw_rate_tau}};
    j["yaw_pd"] = {{"kp", cfg.yaw_pd.kp}, {"kd", cfg.yaw_pd.kd}, {"max_rate", cfg.yaw_pd.max_rate}};
    j["nmpc"] = {{"horizon", cfg.nmpc.horizon},
                 {"dt", cfg.nmpc.dt},
                 {"max_outer_iters", cfg.nmpc.max_outer_iters},
                 {"max_inner_iters", cfg.nmpc.max_inner_iters},
                 {"penalty_initial", cfg.nmpc.penalty_initial},
                 {"rate_tolerance", cfg.nmpc.rate_tolerance},
                 {"step_tolerance", cfg.nmpc.step_tolerance}};
    std::vector<double> qx(cfg.weights.q_x.data(), cfg.weights.q_x.data() + 8);
    j["weights"] = {{"q_x", qx},
                    {"q_u", vec3_to(cfg.weights.q_u)},
                    {"q_du", vec3_to(cfg.weights.q_du)},
                    {"q_p_min", cfg.weights.q_p_min},
                    {"q_p_max", cfg.weights.q_p_max},
                    {"c", cfg.weights.c}};
    j["bounds"] = {{"u_min", vec3_to(cfg.bounds.u_min)},
                   {"u_max", vec3_to(cfg.bounds.u_max)},
                   {"d_roll_max", cfg.bounds.d_roll_max},
                   {"d_pitch_max", cfg.bounds.d_pitch_max}};
    j["apf"] = {{"r_influence", cfg.apf.r_influence},
                {"r_critical", cfg.apf.r_critical},
                {"gain", vec3_to(cfg.apf.gain)},
                {"critical_gain", cfg.apf.critical_gain},
                {"dust_count", cfg.apf.dust_count},
                {"f_max", cfg.apf.f_max},
                {"df_max", cfg.apf.df_max}};
    j["dphr"] = {{"n_clusters", cfg.dphr.n_clusters},
                 {"kmeans_iters", cfg.dphr.kmeans_iters},
                 {"close_kernel", cfg.dphr.close_kernel},
                 {"yaw_gain", cfg.dphr.yaw_gain},
                 {"max_yaw_rate", cfg.dphr.max_yaw_rate},
                 {"max_width", cfg.dphr.max_width},
                 {"max_height", cfg.dphr.max_height},
                 {"min_depth_contrast", cfg.dphr.min_depth_contrast},
                 {"invalid_decay", cfg.dphr.invalid_decay}};
    json priors = json::object();
    for (const auto& [cls, band] : cfg.localizer.size_priors) {
        priors[std::to_string(cls)] = json::array({band.width_min, band.width_max});
    }
    j["localizer"] = {{"confidence_threshold", cfg.localizer.confidence_threshold},
                      {"range_gate", cfg.localizer.range_gate},
                      {"quiet_window", cfg.localizer.quiet_window},
                      {"cluster_radius", cfg.localizer.cluster_radius},
                      {"merge_radius", cfg.localizer.merge_radius},
                      {"min_cluster_support", cfg.localizer.min_cluster_support},
                      {"size_priors", priors}};
    j["mission"] = {{"t_reference", cfg.mission.t_reference},
                    {"altitude_setpoint", cfg.mission.altitude_setpoint},
                    {"carrot_distance", cfg.mission.carrot_distance},
                    {"crumb_spacing", cfg.mission.crumb_spacing},
                    {"arrival_radius", cfg.mission.arrival_radius},
                    {"takeoff_rate", cfg.mission.takeoff_rate},
                    {"land_rate", cfg.mission.land_rate},
                    {"hover_settle", cfg.mission.hover_settle},
                    {"altitude_tolerance", cfg.mission.altitude_tolerance},
                    {"touchdown_height", cfg.mission.touchdown_height}};
    j["lidar"] = {{"rings", cfg.rig.lidar.rings},
                  {"vertical_fov_deg", cfg.rig.lidar.vertical_fov_deg},
                  {"azimuth_steps", cfg.rig.lidar.azimuth_steps},
                  {"max_range", cfg.rig.lidar.max_range},
                  {"min_range", cfg.rig.lidar.min_range},
                  {"rate_hz", cfg.rig.lidar.rate_hz},
                  {"noise_sigma", cfg.rig.lidar.noise_sigma},
                  {"dust_rate", cfg.rig.lidar.dust_rate},
                  {"dust_near", cfg.rig.lidar.dust_near},
                  {"dust_far", cfg.rig.lidar.dust_far}};
    j["depth_cam"] = {{"width", cfg.rig.depth_cam.width},
                      {"height", cfg.rig.depth_cam.height},
                      {"hfov_deg", cfg.rig.depth_cam.hfov_deg},
                      {"vfov_deg", cfg.rig.depth_cam.vfov_deg},
                      {"max_range", cfg.rig.depth_cam.max_range},
                      {"rate_hz", cfg.rig.depth_cam.rate_hz},
                      {"noise_sigma", cfg.rig.depth_cam.noise_sigma},
                      {"mount_offset", vec3_to(cfg.rig.depth_cam.mount_offset)}};
    j["single_beam"] = {{"max_range", cfg.rig.single_beam.max_range},
                        {"rate_hz", cfg.rig.single_beam.rate_hz},
                        {"noise_sigma", cfg.rig.single_beam.noise_sigma}};
    j["detection"] = {{"p_detect", cfg.detection.p_detect},
                      {"fade_start", cfg.detection.fade_start},
                      {"max_range", cfg.detection.max_range},
                      {"min_range", cfg.detection.min_range},
                      {"pixel_jitter", cfg.detection.pixel_jitter},
                      {"confidence_min", cfg.detection.confidence_min},
                      {"confidence_max", cfg.detection.confidence_max},
                      {"fp_rate", cfg.detection.fp_rate},
                      {"fp_inband_fraction", cfg.detection.fp_inband_fraction}};
    return j;
}

}  // namespace tunnelpilot
