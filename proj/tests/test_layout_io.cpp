#include "support.hpp"

#include "surftrap/layout_io.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace surftrap;
using testing_support::published_linear;
using testing_support::rectangle;

TEST(LayoutIo, RoundTripIsLossless) {
    const std::vector<Eigen::Vector2d> in{{634.0, 56.0}, {607.0, 25.8}};
    const auto p = LayoutParams::published();
    for (const TrapLayout& L : {published_linear(), build_layout(p, SplineBoundary::from_internal(p, in))}) {
        const std::string text = layout_to_json(L).dump();
        const TrapLayout back = layout_from_json(nlohmann::json::parse(text));
        EXPECT_EQ(back.params, L.params);
        EXPECT_EQ(back.transition, L.transition);
        EXPECT_EQ(back.tiling, L.tiling);
        ASSERT_EQ(back.electrodes.size(), L.electrodes.size());
        for (std::size_t i = 0; i < L.electrodes.size(); ++i) EXPECT_EQ(back.electrodes[i], L.electrodes[i]);
    }
}

TEST(LayoutIo, ClockwisePolygons) {
    TrapLayout L;
    L.electrodes.push_back(rectangle("A", 0, 10, 0, 10));
    auto j = layout_to_json(L);
    auto& v = j["electrodes"][0]["vertices"];
    std::reverse(v.begin(), v.end());
    ImportReport rep;
    const TrapLayout back = layout_from_json(j, {}, &rep);
    ASSERT_EQ(rep.warnings.size(), 1u);
    EXPECT_NE(rep.warnings[0].find("'A'"), std::string::npos);
    EXPECT_GT(polygon::signed_area(back.electrodes[0].vertices), 0.0);
    ImportOptions strict;
    strict.strict = true;
    EXPECT_THROW(layout_from_json(j, strict), InputError);
}

TEST(LayoutIo, RejectsBadLayouts) {
    TrapLayout L;
    EXPECT_THROW(layout_from_json(layout_to_json(L)), InputError);  // empty
    L.electrodes.push_back(rectangle("first", 0, 10, 0, 10));
    L.electrodes.push_back(rectangle("second", 5, 15, 5, 15));
    try {
        layout_from_json(layout_to_json(L));
        FAIL();
    } catch (const InputError& e) {
        const std::string m = e.what();
        EXPECT_NE(m.find("first"), std::string::npos);
        EXPECT_NE(m.find("second"), std::string::npos);
    }
    L.electrodes[1] = rectangle("first", 20, 30, 0, 10);
    EXPECT_THROW(layout_from_json(layout_to_json(L)), InputError);  // duplicate
    auto j = layout_to_json(published_linear());
    j["electrodes"][0]["vertices"] = nlohmann::json::array({{0, 0}, {1, 1}});
    EXPECT_THROW(layout_from_json(j), InputError);
    j = layout_to_json(published_linear());
    j["params"]["a"] = 3;
    EXPECT_THROW(layout_from_json(j), InputError);
    j = layout_to_json(published_linear());
    j["format"] = "other";
    EXPECT_THROW(layout_from_json(j), InputError);
}

TEST(LayoutIo, SvgHasOnePolygonPerElectrode) {
    std::ostringstream os;
    SvgOptions opt;
    opt.paths.push_back({{18, 0}, {20, 100}});
    write_layout_svg(os, published_linear(), opt);
    const std::string s = os.str();
    std::size_t n = 0;
    for (std::size_t at = s.find("<polygon"); at != std::string::npos; at = s.find("<polygon", at + 1)) ++n;
    EXPECT_EQ(n, published_linear().electrodes.size());
    EXPECT_NE(s.find("<polyline"), std::string::npos);
    EXPECT_NE(s.find(">rf</text>"), std::string::npos);
    EXPECT_NE(s.find(">dc</text>"), std::string::npos);
}
