#include <doctest.h>

#include <cmath>
#include <random>

#include "tunnelpilot/config.hpp"
#include "tunnelpilot/dphr.hpp"
#include "tunnelpilot/sensors.hpp"

using namespace tunnelpilot;

namespace {

TunnelWorld straight_tunnel(double width = 3.5, double height = 2.0, double length = 40.0) {
    TunnelWorld w;
    PathBuilder pb({0, 0}, 0.0);
    pb.straight(length);
    Tunnel t;
    t.segments = pb.build();
    t.total_length = pb.total_length();
    t.profile = {{0.0, width, height, 0.0}, {length, width, height, 0.0}};
    w.tunnels.push_back(t);
    w.finalize();
    return w;
}

LidarConfig noiseless_lidar() {
    LidarConfig cfg;
    cfg.noise_sigma = 0.0;
    cfg.dust_rate = 0.0;
    return cfg;
}

}  // namespace

TEST_CASE("lateral rays in a straight tunnel hit at half width") {
    const TunnelWorld w = straight_tunnel(3.5, 2.0);
    VehicleState pose;
    pose.p = {20.0, 0.0, 1.0};

    std::mt19937_64 rng(1);
    const PointCloud cloud = raycast_lidar(w, pose, noiseless_lidar(), rng);
    REQUIRE(!cloud.empty());

    double min_lateral = 1e9;
    for (const Vec3& p : cloud.points) {
        // Near-horizontal rays to the sides.
        if (std::abs(p.z()) < 0.05 && std::abs(p.y()) > std::abs(p.x())) {
            min_lateral = std::min(min_lateral, std::abs(p.y()));
        }
    }
    CHECK(min_lateral == doctest::Approx(1.75).epsilon(1e-3));
}

TEST_CASE("open void returns nothing") {
    TunnelWorld w;  // no tunnels: all air
    w.finalize();
    VehicleState pose;
    std::mt19937_64 rng(2);
    const PointCloud cloud = raycast_lidar(w, pose, noiseless_lidar(), rng);
    CHECK(cloud.empty());
}

TEST_CASE("thin beam ahead is detected by the scan") {
    TunnelWorld w = straight_tunnel(3.5, 2.5);
    Obstacle beam;
    beam.shape = Obstacle::Shape::Capsule;
    beam.a = {22.0, -1.75, 1.0};
    beam.b = {22.0, 1.75, 1.0};
    beam.radius = 0.025;  // 5 cm thin bar at ring height
    beam.tag = "beam";
    w.obstacles.push_back(beam);
    w.finalize();

    VehicleState pose;
    pose.p = {20.0, 0.0, 1.0};
    std::mt19937_64 rng(3);
    std::vector<int> ids;
    raycast_lidar(w, pose, noiseless_lidar(), rng, &ids);
    int beam_hits = 0;
    for (int id : ids) {
        if (id == kSurfaceObstacleBase + 0) {
            ++beam_hits;
        }
    }
    CHECK(beam_hits >= 1);
}

TEST_CASE("pose outside the tunnel still traces, with immediate hits") {
    const TunnelWorld w = straight_tunnel();
    VehicleState pose;
    pose.p = {20.0, 10.0, 1.0};  // buried in rock
    const auto hit = w.raycast(pose.p, Vec3{1, 0, 0}, 50.0);
    REQUIRE(hit.has_value());
    CHECK(hit->range == 0.0);
}

TEST_CASE("depth render against a facing wall follows ray ranges") {
    // Wall three meters ahead of the camera: tunnel ends at x = 23.1 and the
    // camera sits 0.1 m ahead of the body origin.
    const TunnelWorld w = straight_tunnel(3.5, 2.5, 23.1);
    VehicleState pose;
    pose.p = {20.0, 0.0, 1.2};

    DepthCamConfig cam;
    cam.noise_sigma = 0.0;
    std::mt19937_64 rng(4);
    const DepthImage img = render_depth(w, pose, cam, rng);

    const int cx = img.width / 2, cy = img.height / 2;
    CHECK(img.at(cx, cy) == doctest::Approx(3.0).epsilon(2e-3));

    // Off-axis pixel: range = 3 / cos(angle to the optical axis).
    const int u = cx + 20;
    const Vec3 dir{(u + 0.5 - img.cx) / img.fx, (cy + 0.5 - img.cy) / img.fy, 1.0};
    const double expected = 3.0 / (dir.normalized().z());
    CHECK(img.at(u, cy) == doctest::Approx(expected).epsilon(2e-3));
}

TEST_CASE("straight tunnel looks deepest at the principal point") {
    const TunnelWorld w = straight_tunnel(3.5, 2.5, 60.0);
    VehicleState pose;
    pose.p = {10.0, 0.0, 1.25};
    DepthCamConfig cam;
    cam.noise_sigma = 0.0;
    std::mt19937_64 rng(5);
    const DepthImage img = render_depth(w, pose, cam, rng);
    const DeepestCluster c = deepest_cluster_centroid(img, 10);
    REQUIRE(c.valid);
    CHECK(std::abs(c.centroid_x - img.cx) < 1.5);
}

TEST_CASE("right-curving tunnel pulls the deepest cluster right of center") {
    TunnelWorld w;
    PathBuilder pb({0, 0}, 0.0);
    pb.straight(6.0).arc(12.0, -60.0 * M_PI / 180.0);  // curve to the right
    Tunnel t;
    t.segments = pb.build();
    t.total_length = pb.total_length();
    t.profile = {{0.0, 3.5, 2.5, 0.0}, {t.total_length, 3.5, 2.5, 0.0}};
    w.tunnels.push_back(t);
    w.finalize();

    VehicleState pose;
    pose.p = {2.0, 0.0, 1.25};
    DepthCamConfig cam;
    cam.noise_sigma = 0.0;
    std::mt19937_64 rng(6);
    const DepthImage img = render_depth(w, pose, cam, rng);
    const DeepestCluster c = deepest_cluster_centroid(img, 10);
    REQUIRE(c.valid);
    CHECK(c.centroid_x > img.cx + 2.0);
}

TEST_CASE("clearance in a box tunnel is the analytic minimum") {
    const TunnelWorld w = straight_tunnel(3.5, 2.0);
    CHECK(w.clearance({20.0, 0.0, 1.5}) == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(w.clearance({20.0, 1.75, 1.0}) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(w.clearance({20.0, 0.0, 1.0}) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("clearance matches a dense surface-sampling oracle") {
    TunnelWorld w = TunnelWorld::preset("curving");
    w.artifacts.clear();  // walls only for the parametric oracle
    const Tunnel& t = w.tunnels.front();

    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> us(3.0, t.total_length - 3.0);
    std::uniform_real_distribution<double> ulat(-0.9, 0.9);
    std::uniform_real_distribution<double> uz(0.3, 2.2);

    for (int trial = 0; trial < 10; ++trial) {
        const double s0 = us(rng);
        Vec2 c, tan;
        t.frame_at(s0, c, tan);
        const Vec2 left{-tan.y(), tan.x()};
        const Vec2 pos2 = c + ulat(rng) * left;
        const Vec3 p{pos2.x(), pos2.y(), uz(rng)};

        double width, height, floor_z;
        t.interpolate_profile(s0, width, height, floor_z);

        // Sample then locally refine the side-wall distance along arc length.
        auto wall_distance = [&](double side) {
            auto at = [&](double s) {
                Vec2 cc, tt;
                t.frame_at(s, cc, tt);
                const Vec2 lf{-tt.y(), tt.x()};
                const Vec2 wall2 = cc + side * (width / 2.0) * lf;
                const double planar = (Vec2{p.x(), p.y()} - wall2).norm();
                const double dz = std::clamp(p.z(), floor_z, floor_z + height) - p.z();
                return std::hypot(planar, dz);
            };
            double best_s = 0.0, best = 1e18;
            for (double s = 0.0; s <= t.total_length; s += 0.05) {
                const double d = at(s);
                if (d < best) {
                    best = d;
                    best_s = s;
                }
            }
            double lo = std::max(0.0, best_s - 0.1), hi = std::min(t.total_length, best_s + 0.1);
            for (int i = 0; i < 60; ++i) {
                const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
                if (at(m1) < at(m2)) {
                    hi = m2;
                } else {
                    lo = m1;
                }
            }
            return at(0.5 * (lo + hi));
        };

        const double oracle = std::min({p.z() - floor_z, floor_z + height - p.z(),
                                        wall_distance(+1.0), wall_distance(-1.0),
                                        s0, t.total_length - s0});
        CHECK(w.clearance(p) == doctest::Approx(oracle).epsilon(2e-3));
    }
}

TEST_CASE("raycast hits lie on surfaces and never undercut the clearance") {
    const TunnelWorld w = TunnelWorld::preset("curving");
    std::mt19937_64 rng(14);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const Vec3 origin = w.start_position + Vec3{4.0, 0.0, 1.0};
    const double clear = w.clearance(origin);
    for (int i = 0; i < 300; ++i) {
        const Vec3 dir = Vec3{u(rng), u(rng), u(rng)}.normalized();
        const auto hit = w.raycast(origin, dir, 100.0);
        if (!hit) {
            continue;
        }
        CHECK(std::abs(w.sdf_air(origin + hit->range * dir)) < 1e-3);
        CHECK(hit->range >= clear - 1e-6);
    }
}

TEST_CASE("single-beam altitude over a flat floor") {
    const TunnelWorld w = straight_tunnel();
    VehicleState pose;
    pose.p = {20.0, 0.0, 1.3};
    BeamConfig cfg;
    cfg.noise_sigma = 0.0;
    std::mt19937_64 rng(9);
    CHECK(single_beam_range(w, pose, cfg, rng) == doctest::Approx(1.3).epsilon(1e-3));

    // Tilted: slant range is altitude / (cos(pitch) cos(roll)).
    pose.att.pitch = 0.15;
    const double slant = single_beam_range(w, pose, cfg, rng);
    CHECK(slant * std::cos(0.15) == doctest::Approx(1.3).epsilon(1e-3));
}

TEST_CASE("detections round-trip through the localizer") {
    TunnelWorld w = straight_tunnel(3.5, 2.5, 40.0);
    Artifact art;
    art.class_id = 2;
    art.position = {23.0, 0.0, 0.3};
    art.width = 0.5;
    art.height = 0.6;
    art.thickness = 0.3;
    art.yaw = M_PI_2;
    w.artifacts.push_back(art);
    w.finalize();

    VehicleState pose;
    pose.p = {20.0, 0.0, 1.2};
    DepthCamConfig cam;
    cam.noise_sigma = 0.0;
    DetectionModelConfig det_cfg;
    det_cfg.p_detect = 1.0;
    det_cfg.pixel_jitter = 0.0;
    det_cfg.fp_rate = 0.0;

    std::mt19937_64 rng(10);
    const DepthImage img = render_depth(w, pose, cam, rng);
    const auto dets = synth_detections(w, pose, cam, det_cfg, img, 0.0, rng);
    REQUIRE(dets.size() == 1);
    CHECK(dets[0].class_id == 2);

    const auto m = localize_detection(dets[0], img, pose, forward_camera_mount(cam.mount_offset));
    REQUIRE(m.has_value());
    // Depth hits the front face: error bounded by half the box depth plus jitter.
    CHECK((m->p_world - art.position).norm() < art.thickness / 2.0 + 0.1);
    CHECK(m->metric_width == doctest::Approx(art.width).epsilon(0.15));
}

TEST_CASE("artifact behind the camera is not detected") {
    TunnelWorld w = straight_tunnel();
    Artifact art;
    art.class_id = 1;
    art.position = {15.0, 0.0, 0.3};
    w.artifacts.push_back(art);
    w.finalize();

    VehicleState pose;
    pose.p = {20.0, 0.0, 1.2};  // artifact 5 m behind
    DepthCamConfig cam;
    DetectionModelConfig det_cfg;
    det_cfg.p_detect = 1.0;
    det_cfg.fp_rate = 0.0;
    std::mt19937_64 rng(11);
    const DepthImage img = render_depth(w, pose, cam, rng);
    CHECK(synth_detections(w, pose, cam, det_cfg, img, 0.0, rng).empty());
}

TEST_CASE("occluded artifact is not detected") {
    TunnelWorld w = straight_tunnel(3.5, 2.5, 40.0);
    Artifact art;
    art.class_id = 1;
    art.position = {24.0, 0.0, 1.2};
    w.artifacts.push_back(art);
    Obstacle blocker;
    blocker.shape = Obstacle::Shape::Box;
    blocker.center = {22.0, 0.0, 1.2};
    blocker.half_extents = {0.1, 1.0, 1.0};
    w.obstacles.push_back(blocker);
    w.finalize();

    VehicleState pose;
    pose.p = {20.0, 0.0, 1.2};
    DepthCamConfig cam;
    DetectionModelConfig det_cfg;
    det_cfg.p_detect = 1.0;
    det_cfg.fp_rate = 0.0;
    std::mt19937_64 rng(12);
    const DepthImage img = render_depth(w, pose, cam, rng);
    CHECK(synth_detections(w, pose, cam, det_cfg, img, 0.0, rng).empty());
}

TEST_CASE("injected false positives are rejected by the gates") {
    const TunnelWorld w = straight_tunnel(3.5, 2.5, 40.0);
    VehicleState pose;
    pose.p = {20.0, 0.0, 1.2};
    DepthCamConfig cam;
    cam.noise_sigma = 0.0;
    DetectionModelConfig det_cfg;
    det_cfg.p_detect = 1.0;
    det_cfg.fp_rate = 5.0;  // force plenty of false positives
    det_cfg.fp_inband_fraction = 0.0;  // all out-of-band widths

    std::mt19937_64 rng(13);
    const DepthImage img = render_depth(w, pose, cam, rng);
    const auto dets = synth_detections(w, pose, cam, det_cfg, img, 0.0, rng);
    REQUIRE(!dets.empty());

    ObjectLocalizer loc;
    int accepted = 0;
    for (const Detection& det : dets) {
        if (loc.ingest(det, img, pose, forward_camera_mount(cam.mount_offset), 0.0) ==
            IngestResult::Accepted) {
            ++accepted;
        }
    }
    CHECK(accepted == 0);
}

TEST_CASE("sensor streams are deterministic per seed") {
    const TunnelWorld w = TunnelWorld::preset("curving");
    VehicleState pose;
    pose.p = w.start_position + Vec3{3.0, 0.1, 1.1};
    LidarConfig cfg;  // noise and dust on

    std::mt19937_64 rng_a(77), rng_b(77);
    const PointCloud a = raycast_lidar(w, pose, cfg, rng_a);
    const PointCloud b = raycast_lidar(w, pose, cfg, rng_b);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a.points[i] == b.points[i]);
    }
}

TEST_CASE("presets build with sane annotations") {
    for (const std::string& name : TunnelWorld::preset_names()) {
        const TunnelWorld w = TunnelWorld::preset(name);
        CHECK(w.name == name);
        REQUIRE(!w.tunnels.empty());
        CHECK(w.tunnels.front().min_width() >= 1.6);
        CHECK(w.goal_arclength > 0.0);
        CHECK(w.goal_arclength < w.main_length());
        CHECK(w.clearance(w.start_position + Vec3{0, 0, 1.0}) > 0.0);
        // Artifact widths must sit inside their class size band.
        const LocalizerParams priors;
        for (const Artifact& a : w.artifacts) {
            const auto band = priors.size_priors.at(a.class_id);
            CHECK(a.width >= band.width_min);
            CHECK(a.width <= band.width_max);
        }
    }
    CHECK_THROWS_AS(TunnelWorld::preset("nope"), std::invalid_argument);
}
