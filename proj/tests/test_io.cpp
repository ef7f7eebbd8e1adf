#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "poseloop/error.hpp"
#include "poseloop/io.hpp"

using namespace poseloop;

namespace {

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no Error thrown";
  return Errc::kInvalidArgument;
}

std::vector<std::uint8_t> bytes(std::string_view s) { return {s.begin(), s.end()}; }

}  // namespace

TEST(Io, DepthRasterLayout) {
  DepthMap d(3, 2, std::vector<double>{0.5, 1.0, NAN, 2.25, 3.0, 0.125});
  const std::vector<std::uint8_t> b = io::encode_depth(d);
  ASSERT_EQ(b.size(), 12u + 4 * 6);
  EXPECT_EQ(std::string(b.begin(), b.begin() + 4), "DPTH");
  EXPECT_EQ(b[4], 3);
  EXPECT_EQ(b[8], 2);
  // 0.5f = 0x3f000000, little-endian.
  EXPECT_EQ(b[12], 0x00);
  EXPECT_EQ(b[15], 0x3f);

  const DepthMap back = io::decode_depth(b);
  EXPECT_EQ(back.width(), 3);
  EXPECT_EQ(back.height(), 2);
  for (std::size_t i = 0; i < 6; ++i) {
    if (std::isnan(d.values()[i])) {
      EXPECT_TRUE(std::isnan(back.values()[i]));
    } else {
      EXPECT_EQ(back.values()[i], d.values()[i]);
    }
  }
  std::vector<std::uint8_t> cut = b;
  cut.pop_back();
  EXPECT_EQ(code_of([&] { io::decode_depth(cut); }), Errc::kParse);
  EXPECT_EQ(code_of([&] { io::decode_depth(bytes("DPTX00000000")); }), Errc::kParse);
}

TEST(Io, MaskPgm) {
  Mask m(4, 3);
  m.set(1, 0);
  m.set(3, 2);
  const std::vector<std::uint8_t> b = io::encode_mask_pgm(m);
  EXPECT_EQ(std::string(b.begin(), b.begin() + 11), "P5\n4 3\n255\n");
  const Mask back = io::decode_mask_pgm(b);
  EXPECT_TRUE(std::equal(m.bits().begin(), m.bits().end(), back.bits().begin()));

  std::string commented = "P5\n# from a scanner\n2 1\n# depth\n255\n";
  commented += '\x00';
  commented += '\x07';
  const Mask c = io::decode_mask_pgm(bytes(commented));
  EXPECT_FALSE(c.at(0, 0));
  EXPECT_TRUE(c.at(1, 0));
  EXPECT_EQ(code_of([&] { io::decode_mask_pgm(bytes("P2\n1 1\n255\n0")); }), Errc::kParse);
}

TEST(Io, TrajectoryLines) {
  const PoseTrajectory t(std::vector<TimedPose>{
      {0.0, Pose::from_translation(1, 2, 3)},
      {0.5, Pose(Vec3(0, 0, 0.25), Quat(0, 1, 0, 0))}});
  const std::string text = io::trajectory_to_jsonl(t);
  EXPECT_EQ(text,
            "{\"t\":0.0,\"p\":[1.0,2.0,3.0],\"q\":[1.0,0.0,0.0,0.0]}\n"
            "{\"t\":0.5,\"p\":[0.0,0.0,0.25],\"q\":[0.0,1.0,0.0,0.0]}\n");
  const PoseTrajectory back = io::trajectory_from_jsonl(text);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back.pose(1).rotation().coeffs(), t.pose(1).rotation().coeffs());
  EXPECT_EQ(io::trajectory_to_csv(t).substr(0, 20), "t,x,y,z,qw,qx,qy,qz\n");

  // Unnormalized quaternions are accepted and normalized.
  const PoseTrajectory scaled =
      io::trajectory_from_jsonl("{\"t\":0,\"p\":[0,0,0],\"q\":[2,0,0,0]}\n\n");
  EXPECT_EQ(scaled.pose(0).rotation().w(), 1.0);

  try {
    io::trajectory_from_jsonl("{\"t\":0,\"p\":[0,0,0],\"q\":[1,0,0,0]}\n{\"t\":1,\"p\":[0,0]}\n");
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kParse);
    EXPECT_EQ(e.index(), 2u);
  }
  EXPECT_THROW(io::trajectory_from_jsonl("{\"t\":1,\"p\":[0,0,0],\"q\":[1,0,0,0]}\n"
                                         "{\"t\":1,\"p\":[0,0,0],\"q\":[1,0,0,0]}\n"),
               Error);
}

TEST(Io, GraspLine) {
  const GraspTransform g =
      GraspTransform::from_offset(Pose::from_translation(0, 0, 0.1), 2.0);
  const GraspTransform back = io::grasp_from_line(io::grasp_to_line(g));
  EXPECT_EQ(back.grasp_time(), 2.0);
  EXPECT_EQ(back.offset().translation(), g.offset().translation());
  EXPECT_THROW(io::grasp_from_line(""), Error);
}

TEST(Io, Perturbations) {
  const std::string text =
      "{\"kind\":\"grasp_slip\",\"trigger\":{\"waypoint\":10},\"magnitude\":{\"p\":[0.04,0,0]}}\n"
      "{\"kind\":\"ee_impulse\",\"trigger\":5,\"magnitude\":{\"p\":[0,0.02,0],\"q\":[1,0,0,0]}}\n"
      "{\"kind\":\"observation_noise\",\"trigger\":{\"tick\":0},"
      "\"magnitude\":{\"translation_std\":0.001,\"rotation_std_deg\":0.5},\"seed\":9}\n";
  const std::vector<Perturbation> ps = io::perturbations_from_jsonl(text);
  ASSERT_EQ(ps.size(), 3u);
  EXPECT_EQ(ps[0].kind, PerturbationKind::kGraspSlip);
  EXPECT_EQ(ps[0].trigger_kind, TriggerKind::kWaypoint);
  EXPECT_EQ(ps[0].trigger, 10);
  EXPECT_EQ(ps[0].delta.translation().x(), 0.04);
  EXPECT_EQ(ps[1].trigger_kind, TriggerKind::kTick);
  EXPECT_EQ(ps[1].trigger, 5);
  EXPECT_EQ(ps[2].noise_rotation_deg, 0.5);
  EXPECT_EQ(ps[2].seed, 9u);

  for (const Perturbation& p : ps) {
    const Perturbation q = io::perturbation_from_json(io::perturbation_to_json(p));
    EXPECT_EQ(q.kind, p.kind);
    EXPECT_EQ(q.trigger, p.trigger);
    EXPECT_EQ(q.delta.translation(), p.delta.translation());
    EXPECT_EQ(q.noise_translation, p.noise_translation);
  }
  try {
    io::perturbations_from_jsonl(text + "{\"kind\":\"shove\",\"trigger\":1,\"magnitude\":{}}\n");
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.index(), 4u);
  }
}

TEST(Io, Verdicts) {
  const std::vector<Verdict> v{{"pour/1", 1, true, "j", std::nullopt}, {"pour/1", 2, false, "j", true}};
  const std::string text = io::verdicts_to_jsonl(v);
  EXPECT_EQ(text.substr(0, text.find('\n')),
            "{\"video\":\"pour/1\",\"attempt\":1,\"pass\":true,\"judge\":\"j\",\"human\":null}");
  const std::vector<Verdict> back = io::verdicts_from_jsonl(text);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_FALSE(back[0].human);
  EXPECT_EQ(back[1].human, true);
  EXPECT_THROW(io::verdicts_from_jsonl("{\"video\":\"a\",\"attempt\":0,\"pass\":true}"), Error);
}

TEST(Io, TracksAndIntrinsics) {
  TrackSet t;
  t.frame_count = 2;
  t.tracks.push_back({{Vec2(1.5, 2), Vec2(3, 4)}, {true, false}});
  const TrackSet back = io::tracks_from_json(io::tracks_to_json(t));
  EXPECT_EQ(back.frame_count, 2);
  EXPECT_EQ(back.tracks[0].xy, t.tracks[0].xy);
  EXPECT_EQ(back.tracks[0].vis, t.tracks[0].vis);

  const CameraIntrinsics K{500, 500, 320, 240, 640, 480};
  const CameraIntrinsics K2 = io::intrinsics_from_json(io::intrinsics_to_json(K));
  EXPECT_EQ(K2.fx, 500);
  EXPECT_EQ(K2.height, 480);
  nlohmann::json missing = io::intrinsics_to_json(K);
  missing.erase("cy");
  EXPECT_EQ(code_of([&] { io::intrinsics_from_json(missing); }), Errc::kParse);
}

TEST(Io, ExecutionLogEndsWithSummary) {
  ExecutionLog log;
  TickRecord r;
  r.event = TickEvent::kBacktrack;
  r.backtrack_to = 0;
  log.records.push_back(r);
  log.summary.backtracks = 1;
  const std::string text = io::execution_log_to_jsonl(log);
  const std::vector<nlohmann::json> lines = io::parse_jsonl(text);
  ASSERT_EQ(lines.size(), 2u);
  EXPECT_EQ(lines[0]["event"], "backtrack");
  EXPECT_EQ(lines[0]["backtrack_to"], 0);
  EXPECT_EQ(lines[1]["type"], "summary");
  EXPECT_EQ(lines[1]["backtracks"], 1);
}
