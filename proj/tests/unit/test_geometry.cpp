#include "doctest.h"

#include <cmath>
#include <queue>
#include <set>

#include "dognose/geometry.hpp"

using namespace dognose;

namespace {

DomainSpec domain_mm(double width, double height, double cell) {
    DomainSpec d;
    d.width = width;
    d.height = height;
    d.cell_size = cell;
    return d;
}

double group_center_x(const GridMask& m, const PortGroup& g) {
    double s = 0;
    for (int id : g.cells) s += (id % m.nx + 0.5) * m.h;
    return s / static_cast<double>(g.cells.size());
}

const PortGroup& group(const GridMask& m, CellClass kind, int side) {
    for (const PortGroup& g : m.groups)
        if (g.kind == kind && g.side == side) return g;
    REQUIRE(false);
    static PortGroup dummy;
    return dummy;
}

}  // namespace

TEST_CASE("inhale port groups sit nostril_spacing apart at 1 mm cells") {
    SamplerGeometry geom;
    ScenePose pose;
    GridMask m = build_scene(geom, pose, domain_mm(0.256, 0.256, 0.001));

    const PortGroup& left = group(m, CellClass::InhalePort, -1);
    const PortGroup& right = group(m, CellClass::InhalePort, +1);
    const double sep = group_center_x(m, right) - group_center_x(m, left);
    CHECK(std::abs(sep - 0.01932) <= 0.001 / 2 + 1e-12);
}

TEST_CASE("inhale port group spans 8 cells across at h = 1 mm") {
    GridMask m = build_scene(SamplerGeometry{}, ScenePose{}, domain_mm(0.256, 0.256, 0.001));
    const PortGroup& right = group(m, CellClass::InhalePort, +1);
    CHECK(right.cells.size() == 8);
    // cells form one contiguous row
    std::set<int> cols;
    for (int id : right.cells) cols.insert(id % m.nx);
    CHECK(static_cast<int>(cols.size()) == 8);
    CHECK(*cols.rbegin() - *cols.begin() == 7);
}

TEST_CASE("rasterized port widths stay within one cell of the diameter") {
    SamplerGeometry geom;
    for (double h : {0.001, 0.0008, 0.0005}) {
        const int n = static_cast<int>(std::llround(0.256 / h / 2) * 2);
        GridMask m = build_scene(geom, ScenePose{}, domain_mm(n * h, n * h, h));
        for (const PortGroup& g : m.groups) {
            if (g.kind == CellClass::TubeOutlet) continue;
            const double d = g.kind == CellClass::InhalePort ? geom.inhale_diameter : geom.exhale_diameter;
            CHECK(std::abs(static_cast<double>(g.cells.size()) * h - d) <= h + 1e-12);
        }
    }
}

TEST_CASE("contact pose: snout tip row is adjacent to the ground row") {
    ScenePose pose;
    pose.elevation = 0.0;
    GridMask m = build_scene(SamplerGeometry{}, pose, domain_mm(0.25, 0.25, 0.25 / 128));
    // find the lowest sampler cell; must sit in row 1, right above the ground row 0
    int lowest = m.ny;
    for (int j = 0; j < m.ny; ++j)
        for (int i = 0; i < m.nx; ++i)
            if (m.sampler[static_cast<size_t>(m.idx(i, j))]) lowest = std::min(lowest, j);
    CHECK(lowest == 1);
    CHECK(m.at(m.axis_index, 0) == CellClass::Solid);
}

TEST_CASE("raising elevation by k cells shifts the sampler mask exactly k rows") {
    const double h = 0.25 / 128;
    GridMask a = build_scene(SamplerGeometry{}, ScenePose{Orientation::FaceDown, 0.0},
                             domain_mm(0.25, 0.25, h));
    GridMask b = build_scene(SamplerGeometry{}, ScenePose{Orientation::FaceDown, 7 * h},
                             domain_mm(0.25, 0.25, h));
    for (int j = 0; j < a.ny; ++j)
        for (int i = 0; i < a.nx; ++i) {
            if (!a.sampler[static_cast<size_t>(a.idx(i, j))]) continue;
            REQUIRE(j + 7 < b.ny);
            CHECK(a.at(i, j) == b.at(i, j + 7));
            CHECK(b.sampler[static_cast<size_t>(b.idx(i, j + 7))] == 1);
        }
}

TEST_CASE("build_scene is deterministic") {
    GridMask a = build_scene(SamplerGeometry{}, ScenePose{}, domain_mm(0.25, 0.25, 0.25 / 128));
    GridMask b = build_scene(SamplerGeometry{}, ScenePose{}, domain_mm(0.25, 0.25, 0.25 / 128));
    CHECK(a.cls == b.cls);
    CHECK(a.faces.size() == b.faces.size());
}

TEST_CASE("mirror_check holds for default scenes and fails with a port removed") {
    GridMask fd = build_scene(SamplerGeometry{}, ScenePose{}, domain_mm(0.25, 0.25, 0.25 / 128));
    CHECK(mirror_check(fd));

    ScenePose h90;
    h90.orientation = Orientation::Horizontal90;
    GridMask hz = build_scene(SamplerGeometry{}, h90, domain_mm(0.25, 0.25, 0.25 / 128));
    CHECK(mirror_check(hz));

    GridMask broken = fd;
    const PortGroup& ex = group(broken, CellClass::ExhalePort, +1);
    for (int id : ex.cells) broken.cls[static_cast<size_t>(id)] = CellClass::Solid;
    CHECK_FALSE(mirror_check(broken));
}

TEST_CASE("chamber is reachable from outside only through port cells") {
    GridMask m = build_scene(SamplerGeometry{}, ScenePose{}, domain_mm(0.25, 0.25, 0.25 / 128));
    REQUIRE(!m.chamber_cells.empty());

    // flood fill over plain fluid from a far corner
    std::vector<uint8_t> seen(m.cls.size(), 0);
    std::queue<int> q;
    const int start = m.idx(2, m.ny - 2);
    REQUIRE(m.is_fluid(2, m.ny - 2));
    q.push(start);
    seen[static_cast<size_t>(start)] = 1;
    while (!q.empty()) {
        const int cell = q.front();
        q.pop();
        const int i = cell % m.nx, j = cell / m.nx;
        const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
        for (int k = 0; k < 4; ++k) {
            const int ii = i + di[k], jj = j + dj[k];
            if (!m.inside(ii, jj) || !m.is_fluid(ii, jj)) continue;
            const int id = m.idx(ii, jj);
            if (!seen[static_cast<size_t>(id)]) {
                seen[static_cast<size_t>(id)] = 1;
                q.push(id);
            }
        }
    }
    for (int cell : m.chamber_cells) CHECK(seen[static_cast<size_t>(cell)] == 0);

    // every port cell touches at least one fluid cell
    for (const PortGroup& g : m.groups)
        for (int cell : g.cells) {
            const int i = cell % m.nx, j = cell / m.nx;
            const bool ok = (m.inside(i - 1, j) && m.is_fluid(i - 1, j)) ||
                            (m.inside(i + 1, j) && m.is_fluid(i + 1, j)) ||
                            (m.inside(i, j - 1) && m.is_fluid(i, j - 1)) ||
                            (m.inside(i, j + 1) && m.is_fluid(i, j + 1));
            CHECK(ok);
        }
}

TEST_CASE("exhale jet directions decompose at 45 degrees") {
    SamplerGeometry geom;
    geom.exhale_angle = kPi / 4;
    GridMask m = build_scene(geom, ScenePose{}, domain_mm(0.25, 0.25, 0.25 / 128));
    const PortGroup& right = group(m, CellClass::ExhalePort, +1);
    const PortGroup& left = group(m, CellClass::ExhalePort, -1);
    const double s2 = std::sqrt(2.0) / 2.0;
    CHECK(right.jet_dir.x == doctest::Approx(s2));
    CHECK(right.jet_dir.y == doctest::Approx(-s2));
    CHECK(left.jet_dir.x == doctest::Approx(-s2));
    CHECK(left.jet_dir.y == doctest::Approx(-s2));
}

TEST_CASE("domain and resolution errors") {
    SamplerGeometry geom;
    CHECK_THROWS_AS(build_scene(geom, ScenePose{}, domain_mm(0.08, 0.08, 0.08 / 16)), SimError);
    // source above the top must fit
    SourceSpec src;
    src.emission_rate = 1.0;
    src.offset = 10.0;
    CHECK_THROWS_AS(build_scene(geom, ScenePose{}, domain_mm(0.25, 0.25, 0.25 / 128), src), SimError);
    // elevation pushing the sampler out the top
    ScenePose high;
    high.elevation = 0.2;
    CHECK_THROWS_AS(build_scene(geom, high, domain_mm(0.25, 0.25, 0.25 / 128)), SimError);
}

TEST_CASE("horizontal pose rests on the ground facing +x") {
    ScenePose pose;
    pose.orientation = Orientation::Horizontal90;
    GridMask m = build_scene(SamplerGeometry{}, pose, domain_mm(0.25, 0.25, 0.25 / 128));
    CHECK(m.forward.x == doctest::Approx(1.0));
    CHECK(m.forward.y == doctest::Approx(0.0));
    int lowest = m.ny;
    for (int j = 0; j < m.ny; ++j)
        for (int i = 0; i < m.nx; ++i)
            if (m.sampler[static_cast<size_t>(m.idx(i, j))]) lowest = std::min(lowest, j);
    CHECK(lowest == 1);
    SourceSpec src;
    src.emission_rate = 1.0;
    const Vec2 c = m.source_center(src);
    CHECK(c.x > m.snout_tip.x);
    CHECK(c.y == doctest::Approx(m.snout_tip.y));
}
