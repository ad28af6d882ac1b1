#include <gtest/gtest.h>

#include <fstream>
#include <vector>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "kds/scan_ingest.hpp"
#include "test_support.hpp"

using namespace kds;
using kds::test::TempDir;

namespace {

SliceImage flat_slice(int h, int w, std::uint16_t v) { return {Grid<std::uint16_t>(h, w, v), 8}; }

ScanVolume volume_of(std::vector<SliceImage> slices)
{
    ScanVolume v;
    v.scan_id = "scan";
    v.slices = std::move(slices);
    return v;
}

void write_n(const fs::path& dir, int n, int size)
{
    fs::create_directories(dir);
    for (int i = 0; i < n; ++i)
        write_png(dir / ("s" + std::to_string(i) + ".png"), flat_slice(size, size, static_cast<std::uint16_t>(i)));
}

} // namespace

TEST(LoadScan, ReadsAllSlicesInNaturalOrder)
{
    TempDir tmp;
    write_n(tmp.path(), 12, 32);
    const auto scan = load_scan(tmp.path(), "x");
    ASSERT_EQ(scan.size(), 12u);
    for (int i = 0; i < 12; ++i) {
        EXPECT_EQ(scan.slices[i].height(), 32);
        EXPECT_EQ(scan.slices[i].width(), 32);
        EXPECT_EQ(scan.slices[i].pixels(0, 0), i) << "slice order";
        EXPECT_EQ(scan.slice_files[i], "s" + std::to_string(i) + ".png");
    }
    EXPECT_TRUE(scan.unreadable_files.empty());
}

TEST(LoadScan, LargeSlicesPassThrough)
{
    TempDir tmp;
    write_n(tmp.path(), 12, 512);
    const auto scan = load_scan(tmp.path(), "x");
    ASSERT_EQ(scan.size(), 12u);
    EXPECT_EQ(scan.slices[0].height(), 512);
    EXPECT_EQ(scan.slices[0].width(), 512);
}

TEST(LoadScan, EmptyDirectoryIsEmptyScan)
{
    TempDir tmp;
    try {
        load_scan(tmp.path(), "x");
        FAIL() << "expected empty_scan";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::empty_scan);
    }
}

TEST(LoadScan, TruncatedFileIsRecordedAndSkipped)
{
    TempDir tmp;
    write_n(tmp.path(), 6, 64);
    const auto victim = tmp.path() / "s3.png";
    const auto bytes = kds::test::read_bytes(victim);
    std::ofstream(victim, std::ios::binary | std::ios::trunc).write(bytes.data(), bytes.size() / 2);

    const auto scan = load_scan(tmp.path(), "x");
    EXPECT_EQ(scan.size(), 5u);
    EXPECT_EQ(scan.unreadable_files, std::vector<std::string>{"s3.png"});
    EXPECT_TRUE(check_consistency(scan).accepted);
}

TEST(LoadScan, NonImageFilesIgnored)
{
    TempDir tmp;
    write_n(tmp.path(), 5, 16);
    std::ofstream(tmp.path() / "notes.txt") << "hello";
    EXPECT_EQ(load_scan(tmp.path(), "x").size(), 5u);
}

TEST(LoadScan, ColourReducedWithBt601Luma)
{
    TempDir tmp;
    cv::Mat bgr(2, 2, CV_8UC3, cv::Scalar(0, 0, 0));
    bgr.at<cv::Vec3b>(0, 0) = {0, 0, 255};    // pure red
    bgr.at<cv::Vec3b>(0, 1) = {0, 255, 0};    // pure green
    bgr.at<cv::Vec3b>(1, 0) = {255, 0, 0};    // pure blue
    bgr.at<cv::Vec3b>(1, 1) = {30, 120, 200}; // B, G, R
    ASSERT_TRUE(cv::imwrite((tmp.path() / "c.png").string(), bgr));
    const auto img = read_slice(tmp.path() / "c.png");
    ASSERT_TRUE(img);
    EXPECT_EQ(img->bit_depth, 8);
    EXPECT_EQ(img->pixels(0, 0), 76);  // round(76.245)
    EXPECT_EQ(img->pixels(0, 1), 150); // round(149.685)
    EXPECT_EQ(img->pixels(1, 0), 29);  // round(29.07)
    EXPECT_EQ(img->pixels(1, 1), 134); // round(59.8 + 70.44 + 3.42) = round(133.66)
}

TEST(LoadScan, SixteenBitDepthPreserved)
{
    TempDir tmp;
    write_png(tmp.path() / "a.png", {Grid<std::uint16_t>(4, 4, 40000), 16});
    const auto img = read_slice(tmp.path() / "a.png");
    ASSERT_TRUE(img);
    EXPECT_EQ(img->bit_depth, 16);
    EXPECT_EQ(img->pixels(3, 3), 40000);
}

TEST(LoadScan, JpegAndBmpAccepted)
{
    TempDir tmp;
    cv::Mat g(8, 8, CV_8UC1, cv::Scalar(90));
    ASSERT_TRUE(cv::imwrite((tmp.path() / "a1.bmp").string(), g));
    ASSERT_TRUE(cv::imwrite((tmp.path() / "a2.JPG").string(), g));
    const auto scan = load_scan(tmp.path(), "x");
    ASSERT_EQ(scan.size(), 2u);
    EXPECT_EQ(scan.slices[0].pixels(4, 4), 90);
    EXPECT_NEAR(scan.slices[1].pixels(4, 4), 90, 2);
}

TEST(LoadScan, Deterministic)
{
    TempDir tmp;
    kds::test::write_synthetic_scan(tmp.path(), 7, 48, 3);
    EXPECT_EQ(load_scan(tmp.path(), "x"), load_scan(tmp.path(), "x"));
}

TEST(CheckConsistency, TenUniformSlicesAccepted)
{
    const auto qc = check_consistency(volume_of(std::vector<SliceImage>(10, flat_slice(512, 512, 1))));
    EXPECT_TRUE(qc.accepted);
    EXPECT_TRUE(qc.reasons.empty());
}

TEST(CheckConsistency, FourSlicesTooFew)
{
    const auto qc = check_consistency(volume_of(std::vector<SliceImage>(4, flat_slice(512, 512, 1))));
    EXPECT_FALSE(qc.accepted);
    EXPECT_EQ(qc.reasons, std::vector<QcReason>{QcReason::too_few_slices});
}

TEST(CheckConsistency, MixedDimensionsRejected)
{
    std::vector<SliceImage> s(6, flat_slice(512, 512, 1));
    s[2] = flat_slice(256, 256, 1);
    const auto qc = check_consistency(volume_of(s));
    EXPECT_FALSE(qc.accepted);
    EXPECT_EQ(qc.reasons, std::vector<QcReason>{QcReason::inconsistent_dimensions});
}

TEST(CheckConsistency, ReasonsAccumulate)
{
    std::vector<SliceImage> s(3, flat_slice(8, 8, 1));
    s[1] = flat_slice(8, 9, 1);
    const auto qc = check_consistency(volume_of(s));
    EXPECT_FALSE(qc.accepted);
    EXPECT_EQ(qc.reasons, (std::vector<QcReason>{QcReason::inconsistent_dimensions, QcReason::too_few_slices}));
}

TEST(CheckConsistency, AcceptedIffNoReasons)
{
    for (int n = 0; n < 9; ++n) {
        for (bool mixed : {false, true}) {
            std::vector<SliceImage> s(n, flat_slice(4, 4, 0));
            if (mixed && n > 1)
                s[n - 1] = flat_slice(5, 4, 0);
            const auto qc = check_consistency(volume_of(s));
            EXPECT_EQ(qc.accepted, qc.reasons.empty());
            if (qc.accepted) {
                EXPECT_GE(s.size(), kMinSlicesPerScan);
                for (const auto& x : s)
                    EXPECT_EQ(x.height(), s[0].height());
            }
        }
    }
}

TEST(SliceImage, RejectsValuesBeyondDepth)
{
    EXPECT_THROW((SliceImage{Grid<std::uint16_t>(2, 2, 256), 8}), Error);
    EXPECT_THROW((SliceImage{Grid<std::uint16_t>(2, 2, 0), 12}), Error);
}
