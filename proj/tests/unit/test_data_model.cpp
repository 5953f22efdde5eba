#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "hcad/core/manifest.hpp"
#include "hcad/core/netpbm.hpp"
#include "hcad/core/track_log.hpp"
#include "temp_dir.hpp"

using namespace hcad;

TEST(Manifest, OnePerClassHistogram) {
    const auto m = parse_manifest(
        "v1,Normal,frames/v1\n"
        "v2,Burglary,frames/v2\n"
        "v3,Fighting,frames/v3\n"
        "v4,Arson,frames/v4,features/v4.fseq\n"
        "v5,Explosion,frames/v5\n");
    EXPECT_EQ(m.class_histogram(), (std::vector<std::size_t>{1, 1, 1, 1, 1}));
    ASSERT_TRUE(m.entries[3].feature_path);
    EXPECT_EQ(*m.entries[3].feature_path, "features/v4.fseq");
}

TEST(Manifest, FiveClassSupportsTotal3500) {
    // Arson 208, Burglary 866, Explosion 179, Fighting 273, Normal 1974.
    const std::vector<std::pair<std::string, int>> supports = {
        {"Arson", 208}, {"Burglary", 866}, {"Explosion", 179}, {"Fighting", 273}, {"Normal", 1974}};
    std::string text;
    int id = 0;
    for (const auto& [label, n] : supports) {
        for (int i = 0; i < n; ++i) text += "vid" + std::to_string(id++) + "," + label + ",f\n";
    }
    const auto m = parse_manifest(text);
    EXPECT_EQ(m.entries.size(), 3500u);
    EXPECT_EQ(m.class_histogram(), (std::vector<std::size_t>{1974, 866, 273, 208, 179}));
}

TEST(Manifest, UnknownClassIsRejected) {
    try {
        parse_manifest("v1,Shooting,frames/v1\n");
        FAIL() << "expected an error";
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("unknown class label"), std::string::npos);
    }
}

TEST(Manifest, DuplicateVideoIdIsRejected) {
    EXPECT_THROW(parse_manifest("v1,Normal,a\nv1,Arson,b\n"), Error);
}

TEST(Manifest, MissingFileIsMissingDependency) {
    try {
        load_manifest("/nonexistent/manifest.csv");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::MissingDependency);
    }
}

TEST(Manifest, CustomClassSet) {
    const ClassSet classes({"Normal", "Shooting"});
    const auto m = parse_manifest("v1,Shooting,a\n", classes);
    EXPECT_EQ(m.class_histogram(), (std::vector<std::size_t>{0, 1}));
}

TEST(Manifest, SerializeRoundTripProperty) {
    std::mt19937 rng(7);
    const auto classes = ClassSet::defaults();
    for (int trial = 0; trial < 50; ++trial) {
        DatasetManifest m;
        const int n = static_cast<int>(rng() % 20);
        for (int i = 0; i < n; ++i) {
            ManifestEntry e{"video_" + std::to_string(trial) + "_" + std::to_string(i),
                            classes.label(rng() % classes.size()), "frames/" + std::to_string(i), std::nullopt};
            if (rng() % 2) e.feature_path = "cache/" + e.video_id + ".fseq";
            m.entries.push_back(e);
        }
        EXPECT_EQ(parse_manifest(serialize_manifest(m)), m);
    }
}

TEST(TrackLog, EmptyLogIsValid) {
    const auto report = validate_track_log({}, 10);
    EXPECT_TRUE(report.valid());
    EXPECT_TRUE(report.issues.empty());
}

TEST(TrackLog, DuplicateFrameIdFlagged) {
    std::vector<TrackRecord> log = {{3, 7, {0, 0, 5, 5}, 0.9}, {3, 7, {10, 10, 5, 5}, 0.8}};
    const auto report = validate_track_log(log, 10);
    EXPECT_EQ(report.count(TrackLogIssue::Kind::DuplicateId), 1u);
}

TEST(TrackLog, FrameIndexEqualToCountFlagged) {
    std::vector<TrackRecord> log = {{10, 1, {0, 0, 5, 5}, 0.9}};
    const auto report = validate_track_log(log, 10);
    EXPECT_EQ(report.count(TrackLogIssue::Kind::FrameOutOfRange), 1u);
}

TEST(TrackLog, NonPositiveBoxFlagged) {
    std::vector<TrackRecord> log = {{0, 1, {0, 0, 0, 5}, 0.9}};
    EXPECT_EQ(validate_track_log(log, 1).count(TrackLogIssue::Kind::NonPositiveBox), 1u);
}

TEST(TrackLog, RawDetectionsMayShareFrame) {
    std::vector<TrackRecord> log = {{0, -1, {0, 0, 5, 5}, 0.9}, {0, -1, {9, 9, 5, 5}, 0.3}};
    EXPECT_TRUE(validate_track_log(log, 1).valid());
}

TEST(TrackLog, SpaceAndCommaSeparatedParse) {
    const auto a = parse_track_log("0 -1 10 20 30 40 0.9\n");
    const auto b = parse_track_log("0,-1,10,20,30,40,0.9\n");
    ASSERT_EQ(a.size(), 1u);
    EXPECT_EQ(a, b);
    EXPECT_EQ(a[0].box, (BoundingBox{10, 20, 30, 40}));
}

TEST(TrackLog, FormatParsesBackExactly) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 500.0);
    std::vector<TrackRecord> log;
    for (int i = 0; i < 100; ++i) {
        log.push_back({i, i % 4 + 1, {u(rng), u(rng), u(rng) + 1, u(rng) + 1}, u(rng) / 500.0});
    }
    EXPECT_EQ(parse_track_log(format_track_log(log)), log);
    EXPECT_EQ(parse_track_log(format_track_log(log, FieldSeparator::Comma)), log);
}

TEST(TrackLog, MalformedLineIsFormatError) {
    EXPECT_THROW(parse_track_log("0 1 2 3\n"), Error);
    EXPECT_THROW(parse_track_log("0 1 a 3 4 5 0.5\n"), Error);
}

TEST(BoundingBox, ClampedBoxLiesInsideFrame) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-200.0, 800.0);
    const FrameSize frame{480, 640};
    for (int i = 0; i < 1000; ++i) {
        const auto b = clamp_box({u(rng), u(rng), std::abs(u(rng)) + 1, std::abs(u(rng)) + 1}, frame);
        EXPECT_GE(b.x, 0.0);
        EXPECT_GE(b.y, 0.0);
        EXPECT_LE(b.right(), frame.width);
        EXPECT_LE(b.bottom(), frame.height);
    }
}

TEST(Netpbm, EncodeDecodeRoundTrip) {
    Image8 rgb(5, 7, 3), gray(4, 3, 1);
    std::uint8_t v = 0;
    for (auto& p : rgb.pixels()) p = v += 13;
    for (auto& p : gray.pixels()) p = v += 29;
    EXPECT_EQ(netpbm::decode(netpbm::encode(rgb)), rgb);
    EXPECT_EQ(netpbm::decode(netpbm::encode(gray)), gray);
}

TEST(Netpbm, ListsFramesInOrder) {
    test::TempDir dir;
    Image8 img(2, 2, 1);
    for (int i : {2, 0, 1}) netpbm::write(dir.path() / netpbm::frame_name(i, 1), img);
    const auto frames = netpbm::list_frames(dir.path());
    ASSERT_EQ(frames.size(), 3u);
    EXPECT_EQ(frames[0].filename(), "frame_000000.pgm");
    EXPECT_EQ(frames[2].filename(), "frame_000002.pgm");
}
