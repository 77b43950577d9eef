#include "tunnelpilot/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <queue>
#include <sstream>

namespace tunnelpilot {

const char* outcome_name(MissionOutcome outcome) {
    switch (outcome) {
        case MissionOutcome::Success: return "SUCCESS";
        case MissionOutcome::Crash: return "CRASH";
        case MissionOutcome::Timeout: return "TIMEOUT";
        case MissionOutcome::Stopped: return "STOPPED";
        case MissionOutcome::Failed: return "FAILED";
    }
    return "?";
}

namespace {

constexpr std::int64_t kBaseHz = 600;  // lcm of 100/30/20/10 Hz task rates

enum TaskId : int { kPlant = 0, kBeam, kLidar, kDepth, kMission, kControl };

struct ScheduledTask {
    std::int64_t tick;
    int id;
    bool operator>(const ScheduledTask& other) const {
        return tick != other.tick ? tick > other.tick : id > other.id;
    }
};

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

constexpr double kRestHeight = 0.08;  // skid height when sitting on the floor

std::mt19937_64 seeded_stream(std::uint64_t seed, std::uint64_t salt) {
    return std::mt19937_64(seed * 0x9E3779B97F4A7C15ULL + salt);
}

}  // namespace

MissionReport run_mission(const RunConfig& config) {
    const auto wall_start = std::chrono::steady_clock::now();

    TunnelWorld world = TunnelWorld::preset(config.world_preset);
    world.rng_seed = config.seed;

    MissionParams mission_params = config.mission;
    mission_params.t_reference =
        config.t_reference >= 0.0 ? config.t_reference : world.default_t_reference;
    mission_params.altitude_setpoint =
        config.altitude_setpoint >= 0.0 ? config.altitude_setpoint : world.default_altitude;
    const double max_sim_time = config.max_sim_time >= 0.0
                                    ? config.max_sim_time
                                    : 20.0 + 2.8 * mission_params.t_reference + 45.0;

    std::mt19937_64 init_rng = seeded_stream(config.seed, 0x11);
    std::mt19937_64 lidar_rng = seeded_stream(config.seed, 0x22);
    std::mt19937_64 depth_rng = seeded_stream(config.seed, 0x33);
    std::mt19937_64 beam_rng = seeded_stream(config.seed, 0x44);
    std::mt19937_64 det_rng = seeded_stream(config.seed, 0x55);

    VehicleState state;
    {
        std::uniform_real_distribution<double> unit(-1.0, 1.0);
        const double yaw = world.start_yaw + unit(init_rng) * config.initial_yaw_jitter;
        const Vec3 left{-std::sin(world.start_yaw), std::cos(world.start_yaw), 0.0};
        state.p = world.start_position + unit(init_rng) * config.initial_lateral_jitter * left;
        state.att.yaw = wrap_angle(yaw);
    }

    Apf apf(config.apf);
    Dphr dphr(config.dphr);
    ObjectLocalizer localizer(config.localizer);
    MissionExecutive mission(mission_params);
    NmpcSolver solver(config.nmpc, config.plant);
    const NmpcWeights weights = config.resolved_weights();
    const FrameTransform cam_mount = forward_camera_mount(config.rig.depth_cam.mount_offset);

    if (!config.out_dir.empty()) {
        std::filesystem::create_directories(config.out_dir);
        if (config.dphr_debug_dump) {
            std::filesystem::create_directories(config.out_dir + "/dphr");
            dphr.enable_debug_dump(config.out_dir + "/dphr");
        }
    }

    // Beam-tagged obstacles feed the thin-beam visibility statistics.
    std::vector<int> beam_obstacles;
    for (std::size_t i = 0; i < world.obstacles.size(); ++i) {
        if (world.obstacles[i].tag == "beam") {
            beam_obstacles.push_back(static_cast<int>(i));
        }
    }

    MissionReport report;
    report.world_preset = config.world_preset;
    report.seed = config.seed;
    report.profile = config.profile;
    report.out_dir = config.out_dir;
    report.artifacts_total = static_cast<int>(world.artifacts.size());

    ControlCommand applied_cmd{};
    applied_cmd.thrust = config.plant.gravity;  // armed at hover throttle
    ControlCommand prev_cmd = applied_cmd;
    PointCloud latest_cloud;
    HeadingCommand latest_heading{};
    double latest_beam = std::numeric_limits<double>::quiet_NaN();
    MissionCommand mission_cmd{};
    bool lidar_seen = false, depth_seen = false, beam_seen = false;
    double latest_clearance = world.clearance(state.p);

    bool crashed = false, timed_out = false, aborted = false;
    double explore_start = -1.0, return_start = -1.0;

    struct SpeedSample {
        double t, speed, arclength;
    };
    std::vector<SpeedSample> explore_samples;

    std::ostringstream trace;
    trace << "# tunnelpilot-trace v1\n";
    trace << "t,phase,px,py,pz,vx,vy,vz,roll,pitch,yaw,thrust,roll_ref,pitch_ref,"
             "yaw_rate_ref,frx,fry,frz,f_raw_mag,qp,pref_x,pref_y,pref_z,clearance,speed\n";
    std::ostringstream velocity_rows, path_rows;

    std::priority_queue<ScheduledTask, std::vector<ScheduledTask>, std::greater<ScheduledTask>> queue;
    const std::int64_t intervals[6] = {6, 6, 60, 20, 60, 30};
    for (int id = 0; id < 6; ++id) {
        queue.push({0, id});
    }

    double now = 0.0;
    while (!queue.empty()) {
        const ScheduledTask task = queue.top();
        queue.pop();
        now = static_cast<double>(task.tick) / kBaseHz;
        if (now > max_sim_time) {
            timed_out = true;
            break;
        }

        switch (task.id) {
            case kPlant: {
                if (mission_cmd.position_active) {
                    const Vec3 prev_p = state.p;
                    try {
                        state = step_plant(state, applied_cmd, 1.0 / 100.0, config.plant);
                    } catch (const std::exception&) {
                        aborted = true;
                    }
                    if (aborted || !state.finite()) {
                        aborted = true;
                        break;
                    }
                    // Ground reaction while legitimately near the floor.
                    if (mission.phase() == MissionPhase::Takeoff ||
                        mission.phase() == MissionPhase::Land) {
                        const double rest_z = world.floor_z_at(state.p) + kRestHeight;
                        if (state.p.z() < rest_z && state.v.z() < 0.0) {
                            state.p.z() = rest_z;
                            state.v.z() = 0.0;
                        }
                    }
                    report.distance_traveled += (state.p - prev_p).norm();
                    report.max_progress = std::max(report.max_progress,
                                                   world.main_arclength(state.p));
                    latest_clearance = world.clearance(state.p);
                    report.min_clearance_all = std::min(report.min_clearance_all, latest_clearance);
                    if (mission.phase() == MissionPhase::Explore ||
                        mission.phase() == MissionPhase::Return) {
                        report.min_clearance_flight =
                            std::min(report.min_clearance_flight, latest_clearance);
                    }
                    if (latest_clearance <= 0.0) {
                        crashed = true;
                    }
                }
                break;
            }
            case kBeam: {
                latest_beam = single_beam_range(world, state, config.rig.single_beam, beam_rng);
                beam_seen = true;
                break;
            }
            case kLidar: {
                std::vector<int> surface_ids;
                const PointCloud raw =
                    raycast_lidar(world, state, config.rig.lidar, lidar_rng, &surface_ids);
                if (!beam_obstacles.empty()) {
                    double nearest = 1e9;
                    for (int idx : beam_obstacles) {
                        nearest = std::min(nearest, world.obstacles[idx].sdf(state.p));
                    }
                    if (nearest <= 5.0) {
                        ++report.beam_scans_in_range;
                        bool hit = false;
                        for (std::size_t k = 0; k < surface_ids.size(); ++k) {
                            for (int idx : beam_obstacles) {
                                if (surface_ids[k] == kSurfaceObstacleBase + idx) {
                                    hit = true;
                                }
                            }
                        }
                        if (hit) {
                            ++report.beam_scans_with_hit;
                        }
                    }
                }
                latest_cloud = voxel_thin(filter_cloud(raw, config.rig.lidar.min_range),
                                          config.apf_max_points);
                lidar_seen = true;
                break;
            }
            case kDepth: {
                const DepthImage img =
                    render_depth(world, state, config.rig.depth_cam, depth_rng);
                latest_heading = dphr.process(img);
                const std::vector<Detection> dets = synth_detections(
                    world, state, config.rig.depth_cam, config.detection, img, now, det_rng);
                for (const Detection& det : dets) {
                    localizer.ingest(det, img, state, cam_mount, now);
                }
                depth_seen = true;
                break;
            }
            case kMission: {
                mission.notify_sensors(lidar_seen, depth_seen, beam_seen);
                if (config.stop_at_time >= 0.0 && now >= config.stop_at_time) {
                    mission.request_stop();
                }
                const MissionPhase before = mission.phase();
                mission_cmd = mission.tick(state, latest_beam, latest_heading, 60.0 / kBaseHz);
                localizer.process_buffers(now);
                if (before != mission.phase()) {
                    if (mission.phase() == MissionPhase::Explore) {
                        explore_start = now;
                    }
                    if (mission.phase() == MissionPhase::Return) {
                        return_start = now;
                    }
                }
                break;
            }
            case kControl: {
                if (!mission_cmd.position_active) {
                    applied_cmd = ControlCommand{};
                    break;
                }
                const RepulsiveForce rep = repulsive_force(latest_cloud, config.apf);
                const Vec3 p_ref = mission_cmd.apf_active
                                       ? apf.compose_force(mission_cmd.wp_body, rep.force)
                                       : mission_cmd.wp_body;
                const double q_p = adapt_position_weights(weights, rep.raw_magnitude);
                NmpcWeights active = weights;
                active.set_position_weight(q_p);

                NmpcState x0;
                x0.v = world_to_body(state.v, Vec3::Zero(), state.att.yaw);
                x0.roll = state.att.roll;
                x0.pitch = state.att.pitch;
                NmpcState x_ref;
                x_ref.p = p_ref;

                NmpcSolution sol = solver.solve(x0, x_ref, prev_cmd, active, config.bounds);
                ControlCommand next = sol.command;
                if (sol.degraded) {
                    ++report.degraded_solves;
                    next.roll_ref = std::clamp(next.roll_ref,
                                               prev_cmd.roll_ref - config.bounds.d_roll_max,
                                               prev_cmd.roll_ref + config.bounds.d_roll_max);
                    next.pitch_ref = std::clamp(next.pitch_ref,
                                                prev_cmd.pitch_ref - config.bounds.d_pitch_max,
                                                prev_cmd.pitch_ref + config.bounds.d_pitch_max);
                }
                report.max_roll_ref_step = std::max(
                    report.max_roll_ref_step, std::abs(next.roll_ref - prev_cmd.roll_ref));
                report.max_pitch_ref_step = std::max(
                    report.max_pitch_ref_step, std::abs(next.pitch_ref - prev_cmd.pitch_ref));

                next.yaw_rate_ref = (mission_cmd.yaw_mode == YawMode::Rate)
                                        ? mission_cmd.yaw_rate_ref
                                        : yaw_pd(state, mission_cmd.psi_ref, config.yaw_pd);
                applied_cmd = next;
                prev_cmd = next;

                const double speed = state.v.norm();
                report.max_speed = std::max(report.max_speed, speed);
                if (mission.phase() == MissionPhase::Explore) {
                    explore_samples.push_back({now, speed, world.main_arclength(state.p)});
                }

                if (config.write_trace) {
                    trace << fmt(now) << ',' << phase_name(mission.phase()) << ','
                          << fmt(state.p.x()) << ',' << fmt(state.p.y()) << ',' << fmt(state.p.z())
                          << ',' << fmt(state.v.x()) << ',' << fmt(state.v.y()) << ','
                          << fmt(state.v.z()) << ',' << fmt(state.att.roll) << ','
                          << fmt(state.att.pitch) << ',' << fmt(state.att.yaw) << ','
                          << fmt(next.thrust) << ',' << fmt(next.roll_ref) << ','
                          << fmt(next.pitch_ref) << ',' << fmt(next.yaw_rate_ref) << ','
                          << fmt(rep.force.x()) << ',' << fmt(rep.force.y()) << ','
                          << fmt(rep.force.z()) << ',' << fmt(rep.raw_magnitude) << ','
                          << fmt(q_p) << ',' << fmt(p_ref.x()) << ',' << fmt(p_ref.y()) << ','
                          << fmt(p_ref.z()) << ',' << fmt(latest_clearance) << ','
                          << fmt(speed) << '\n';
                }
                velocity_rows << fmt(now) << ',' << fmt(speed) << '\n';
                path_rows << fmt(now) << ',' << fmt(state.p.x()) << ',' << fmt(state.p.y())
                          << ',' << fmt(state.p.z()) << ','
                          << fmt(world.main_arclength(state.p)) << '\n';
                break;
            }
            default:
                break;
        }

        if (crashed || aborted) {
            break;
        }
        if (mission.phase() == MissionPhase::Done || mission.phase() == MissionPhase::Stopped) {
            break;
        }
        queue.push({task.tick + intervals[task.id], task.id});
    }

    report.sim_duration = now;

    // Flush any observations still buffered at mission end.
    localizer.process_buffers(now + config.localizer.quiet_window + 1.0);
    report.reported_objects = localizer.objects();

    for (const Artifact& art : world.artifacts) {
        ArtifactScore score;
        score.class_id = art.class_id;
        score.truth = art.position;
        double best = 1e9;
        for (const LocalizedObject& obj : localizer.objects()) {
            if (obj.class_id != art.class_id) {
                continue;
            }
            best = std::min(best, (obj.position - art.position).norm());
        }
        if (best <= 1.0) {
            score.localized = true;
            score.error = best;
            ++report.artifacts_localized;
        }
        report.artifact_scores.push_back(score);
    }
    for (const LocalizedObject& obj : localizer.objects()) {
        bool matched = false;
        for (const Artifact& art : world.artifacts) {
            if (art.class_id == obj.class_id && (obj.position - art.position).norm() <= 1.5) {
                matched = true;
            }
        }
        if (!matched) {
            ++report.false_positive_objects;
        }
    }

    if (explore_start >= 0.0) {
        const double t_end = return_start >= 0.0 ? return_start : now;
        double sum = 0.0;
        int count = 0;
        double post_min = 1e9;
        double narrow_sum = 0.0, open_sum = 0.0;
        int narrow_count = 0, open_count = 0;
        for (const SpeedSample& s : explore_samples) {
            sum += s.speed;
            ++count;
            if (s.t >= explore_start + 8.0 && s.t <= t_end - 1.0) {
                post_min = std::min(post_min, s.speed);
            }
            if (world.narrow_band_lo >= 0.0) {
                if (s.arclength >= world.narrow_band_lo && s.arclength <= world.narrow_band_hi) {
                    narrow_sum += s.speed;
                    ++narrow_count;
                } else {
                    open_sum += s.speed;
                    ++open_count;
                }
            }
        }
        report.mean_explore_speed = count > 0 ? sum / count : 0.0;
        report.min_explore_speed_post_transient = post_min < 1e9 ? post_min : 0.0;
        if (narrow_count > 0) {
            report.narrow_band_mean_speed = narrow_sum / narrow_count;
        }
        if (open_count > 0) {
            report.open_band_mean_speed = open_sum / open_count;
        }
    }

    if (mission.phase() != MissionPhase::Preflight) {
        report.return_error = (state.p - mission.takeoff_position()).head<2>().norm();
    }

    if (crashed) {
        report.outcome = MissionOutcome::Crash;
    } else if (aborted || timed_out) {
        report.outcome = MissionOutcome::Timeout;
    } else if (mission.phase() == MissionPhase::Stopped) {
        report.outcome = MissionOutcome::Stopped;
    } else if (mission.phase() == MissionPhase::Done &&
               report.min_clearance_all > 0.0 &&
               report.return_error >= 0.0 &&
               report.return_error <= mission_params.arrival_radius) {
        report.outcome = MissionOutcome::Success;
    } else {
        report.outcome = MissionOutcome::Failed;
    }

    report.wall_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();

    if (!config.out_dir.empty()) {
        const std::string base = config.out_dir;
        if (config.write_trace) {
            std::ofstream(base + "/trace.csv") << trace.str();
        }
        std::ofstream(base + "/report.json") << report.to_json().dump(2) << '\n';
        std::ofstream(base + "/config.json") << config_to_json(config).dump(2) << '\n';
        std::ofstream(base + "/velocity.csv") << "t,speed\n" << velocity_rows.str();
        std::ofstream(base + "/path.csv") << "t,x,y,z,arclength\n" << path_rows.str();
        {
            std::ofstream out(base + "/world_outline.csv");
            out << "s,left_x,left_y,right_x,right_y\n";
            for (const auto& row : world.outline()) {
                out << fmt(row[0]) << ',' << fmt(row[1]) << ',' << fmt(row[2]) << ','
                    << fmt(row[3]) << ',' << fmt(row[4]) << '\n';
            }
        }
        {
            std::ofstream out(base + "/objects.jsonl");
            for (const LocalizedObject& obj : localizer.objects()) {
                nlohmann::json j{{"time", obj.last_seen},
                                 {"class_id", obj.class_id},
                                 {"position", {obj.position.x(), obj.position.y(), obj.position.z()}},
                                 {"support_count", obj.support_count}};
                out << j.dump() << '\n';
            }
        }
        {
            std::ofstream out(base + "/events.jsonl");
            for (const MissionEvent& ev : mission.events()) {
                out << nlohmann::json{{"time", ev.time}, {"event", ev.what}}.dump() << '\n';
            }
        }
    }
    return report;
}

nlohmann::json MissionReport::to_json() const {
    nlohmann::json j;
    j["outcome"] = outcome_name(outcome);
    j["world_preset"] = world_preset;
    j["seed"] = seed;
    j["profile"] = profile;
    j["sim_duration"] = sim_duration;
    j["distance_traveled"] = distance_traveled;
    j["mean_explore_speed"] = mean_explore_speed;
    j["max_speed"] = max_speed;
    j["min_explore_speed_post_transient"] = min_explore_speed_post_transient;
    j["narrow_band_mean_speed"] = narrow_band_mean_speed;
    j["open_band_mean_speed"] = open_band_mean_speed;
    j["min_clearance_flight"] = min_clearance_flight;
    j["min_clearance_all"] = min_clearance_all;
    j["max_progress"] = max_progress;
    j["return_error"] = return_error;
    j["max_roll_ref_step"] = max_roll_ref_step;
    j["max_pitch_ref_step"] = max_pitch_ref_step;
    j["degraded_solves"] = degraded_solves;
    j["artifacts_total"] = artifacts_total;
    j["artifacts_localized"] = artifacts_localized;
    j["false_positive_objects"] = false_positive_objects;
    j["beam_scans_in_range"] = beam_scans_in_range;
    j["beam_scans_with_hit"] = beam_scans_with_hit;
    nlohmann::json scores = nlohmann::json::array();
    for (const ArtifactScore& s : artifact_scores) {
        scores.push_back({{"class_id", s.class_id},
                          {"truth", {s.truth.x(), s.truth.y(), s.truth.z()}},
                          {"localized", s.localized},
                          {"error", s.error}});
    }
    j["artifacts"] = scores;
    nlohmann::json objs = nlohmann::json::array();
    // Leading zero entry kept in the serialized object list.
    objs.push_back({0.0, 0.0, 0.0});
    for (const LocalizedObject& o : reported_objects) {
        objs.push_back({o.position.x(), o.position.y(), o.position.z()});
    }
    j["object_list"] = objs;
    return j;
}

BatchResult run_batch(const RunConfig& base, const std::vector<std::uint64_t>& seeds) {
    BatchResult result;
    for (std::uint64_t seed : seeds) {
        RunConfig cfg = base;
        cfg.seed = seed;
        if (!base.out_dir.empty()) {
            cfg.out_dir = base.out_dir + "/seed_" + std::to_string(seed);
        }
        MissionReport report = run_mission(cfg);
        if (report.outcome == MissionOutcome::Success) {
            ++result.successes;
        }
        result.reports.push_back(std::move(report));
    }

    if (!base.out_dir.empty()) {
        std::filesystem::create_directories(base.out_dir);
        std::ofstream out(base.out_dir + "/batch_summary.csv");
        out << "seed,outcome,mean_explore_speed,max_speed,min_clearance_flight,"
               "max_progress,return_error,artifacts_localized,artifacts_total,"
               "false_positives\n";
        for (const MissionReport& r : result.reports) {
            out << r.seed << ',' << outcome_name(r.outcome) << ',' << fmt(r.mean_explore_speed)
                << ',' << fmt(r.max_speed) << ',' << fmt(r.min_clearance_flight) << ','
                << fmt(r.max_progress) << ',' << fmt(r.return_error) << ','
                << r.artifacts_localized << ',' << r.artifacts_total << ','
                << r.false_positive_objects << '\n';
        }
    }
    return result;
}

}  // namespace tunnelpilot
