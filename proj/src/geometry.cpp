#include "dognose/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <set>

namespace dognose {

void SamplerGeometry::validate() const {
    if (snout_height <= 0 || nostril_spacing <= 0 || inhale_diameter <= 0 || exhale_diameter <= 0 ||
        chamber_width <= 0 || chamber_depth <= 0)
        throw_sim_error(ErrorCode::BadConfig, "sampler lengths must be positive");
    if (!(exhale_angle > 0 && exhale_angle < kPi / 2))
        throw_sim_error(ErrorCode::BadConfig, "exhale_angle must lie in (0, pi/2)");
    if (!(nostril_spacing + inhale_diameter < chamber_width))
        throw_sim_error(ErrorCode::BadConfig, "inhale ports do not fit on the chamber face");
}

void ScenePose::validate() const {
    if (elevation < 0) throw_sim_error(ErrorCode::BadConfig, "elevation must be >= 0");
    if (orientation == Orientation::Horizontal90 && elevation != 0.0)
        throw_sim_error(ErrorCode::BadConfig, "Horizontal90 rests on the ground (elevation 0)");
}

void SourceSpec::validate() const {
    if (emission_rate < 0) throw_sim_error(ErrorCode::BadConfig, "emission_rate must be >= 0");
    if (start_time < 0) throw_sim_error(ErrorCode::BadConfig, "start_time must be >= 0");
    if (radius <= 0) throw_sim_error(ErrorCode::BadConfig, "source radius must be positive");
}

int DomainSpec::nx() const { return static_cast<int>(std::llround(width / cell_size)); }
int DomainSpec::ny() const { return static_cast<int>(std::llround(height / cell_size)); }

void DomainSpec::validate() const {
    if (cell_size <= 0 || width <= 0 || height <= 0)
        throw_sim_error(ErrorCode::BadConfig, "domain dimensions must be positive");
    const double rx = width / cell_size, ry = height / cell_size;
    if (std::abs(rx - std::llround(rx)) > 1e-9 * rx || std::abs(ry - std::llround(ry)) > 1e-9 * ry)
        throw_sim_error(ErrorCode::BadConfig, "width and height must be integer multiples of cell_size");
    if (nx() < 16 || ny() < 16) throw_sim_error(ErrorCode::BadConfig, "domain must be at least 16 cells per side");
}

namespace {

constexpr double kWallThickness = 0.003;  // m, sampler shell; >= 2 cells after rasterization

struct PortSpan {
    int lo = 0;  // first column, in cells from the axis cell
    int n = 0;   // number of columns
    double center() const { return lo + (n - 1) / 2.0; }
};

// Choose the cell span for a port of diameter d centered `offset` from the
// axis. Width stays within one cell of d; among the admissible widths the
// span whose center lands closest to the requested offset wins, which keeps
// the rasterized nostril spacing within h/2 of the requested one.
PortSpan port_span(double offset, double d, double h) {
    const double off_cells = offset / h;
    const int n0 = static_cast<int>(std::llround(d / h));
    PortSpan best;
    double best_err = 1e300;
    for (int n : {n0, n0 - 1, n0 + 1}) {
        if (n < 1) continue;
        if (std::abs(n * h - d) > h + 1e-12) continue;
        const int lo = static_cast<int>(std::llround(off_cells - (n - 1) / 2.0));
        const double err = std::abs(lo + (n - 1) / 2.0 - off_cells);
        if (err < best_err - 1e-12) {
            best_err = err;
            best = {lo, n};
        }
    }
    if (best.n == 0) throw_sim_error(ErrorCode::ResolutionTooCoarse, "a port rasterizes to zero cells");
    return best;
}

// Local sampler frame: lateral l (cells from the axis cell, signed) and
// axial a (cells from the snout tip row, increasing toward the back).
struct Frame {
    Orientation o;
    int axis;  // axis cell column (FaceDown) or row (Horizontal90)
    int tip;   // tip row (FaceDown) or tip column (Horizontal90)

    void to_grid(int l, int a, int& i, int& j) const {
        if (o == Orientation::FaceDown) {
            i = axis + l;
            j = tip + a;
        } else {
            i = tip - a;
            j = axis + l;
        }
    }
};

}  // namespace

GridMask build_scene(const SamplerGeometry& geom, const ScenePose& pose, const DomainSpec& domain) {
    geom.validate();
    pose.validate();
    domain.validate();

    GridMask m;
    m.nx = domain.nx();
    m.ny = domain.ny();
    m.h = domain.cell_size;
    m.orientation = pose.orientation;
    m.cls.assign(static_cast<size_t>(m.nx) * m.ny, CellClass::Fluid);
    m.sampler.assign(m.cls.size(), 0);
    const double h = m.h;

    // domain walls (one cell thick)
    auto set_solid = [&](int i, int j) { m.cls[static_cast<size_t>(m.idx(i, j))] = CellClass::Solid; };
    if (domain.bottom == BoundaryClass::Solid)
        for (int i = 0; i < m.nx; ++i) set_solid(i, 0);
    if (domain.top == BoundaryClass::Solid)
        for (int i = 0; i < m.nx; ++i) set_solid(i, m.ny - 1);
    if (domain.left == BoundaryClass::Solid)
        for (int j = 0; j < m.ny; ++j) set_solid(0, j);
    if (domain.right == BoundaryClass::Solid)
        for (int j = 0; j < m.ny; ++j) set_solid(m.nx - 1, j);

    // sampler extents in cells
    const int wall = std::max(2, static_cast<int>(std::llround(kWallThickness / h)));
    const int interior_half = std::max(3, static_cast<int>(std::llround((geom.chamber_width / h - 1.0) / 2.0)));
    const int interior_depth = std::max(3, static_cast<int>(std::llround(geom.chamber_depth / h)));
    const int snout_cells = std::max(2, static_cast<int>(std::llround(geom.snout_height / h)));
    const int half_base = interior_half + wall;
    const int axial_total = snout_cells + wall + interior_depth + wall;

    m.snout_cells = snout_cells;
    m.wall_cells = wall;
    m.interior_depth_cells = interior_depth;
    m.interior_half = interior_half;
    m.half_base = half_base;

    const int ground_rows = (domain.bottom == BoundaryClass::Solid) ? 1 : 0;

    Frame fr{};
    fr.o = pose.orientation;
    if (pose.orientation == Orientation::FaceDown) {
        fr.axis = m.nx / 2;
        fr.tip = ground_rows + static_cast<int>(std::llround(pose.elevation / h));
        m.forward = {0.0, -1.0};
    } else {
        fr.axis = ground_rows + half_base;
        fr.tip = 4 + axial_total - 1;  // back margin of 4 columns
        m.forward = {1.0, 0.0};
    }
    m.axis_index = fr.axis;

    // fit: sampler must keep a 2-cell fluid margin to every domain edge
    {
        int i0, j0, i1, j1;
        fr.to_grid(-half_base, 0, i0, j0);
        fr.to_grid(half_base, axial_total - 1, i1, j1);
        const int lo_i = std::min(i0, i1), hi_i = std::max(i0, i1);
        const int lo_j = std::min(j0, j1), hi_j = std::max(j0, j1);
        const int margin_lo_j = (pose.orientation == Orientation::FaceDown || domain.bottom == BoundaryClass::Solid)
                                    ? ground_rows
                                    : 2;
        if (lo_i < 2 || hi_i > m.nx - 3 || lo_j < margin_lo_j || hi_j > m.ny - 3)
            throw_sim_error(ErrorCode::DomainTooSmall, "sampler does not fit inside the domain");
    }

    // pyramid half-width per axial row; exact half_base at the base row
    auto half_width = [&](int a) {
        return static_cast<int>(std::llround(half_base * (a + 1.0) / snout_cells));
    };
    auto a_surface = [&](int l) {  // first pyramid row that is solid at column |l|
        const int al = std::abs(l);
        for (int a = 0; a < snout_cells; ++a)
            if (half_width(a) >= al) return a;
        return snout_cells;  // outside the pyramid footprint
    };

    auto paint = [&](int l, int a, CellClass c) {
        int i, j;
        fr.to_grid(l, a, i, j);
        m.cls[static_cast<size_t>(m.idx(i, j))] = c;
        m.sampler[static_cast<size_t>(m.idx(i, j))] = 1;
    };

    // solid body: pyramid, front wall, side walls, back wall
    for (int a = 0; a < snout_cells; ++a) {
        const int hw = half_width(a);
        for (int l = -hw; l <= hw; ++l) paint(l, a, CellClass::Solid);
    }
    for (int a = snout_cells; a < snout_cells + wall; ++a)
        for (int l = -half_base; l <= half_base; ++l) paint(l, a, CellClass::Solid);
    for (int a = snout_cells + wall; a < snout_cells + wall + interior_depth; ++a)
        for (int l = -half_base; l <= half_base; ++l)
            paint(l, a, std::abs(l) <= interior_half ? CellClass::Fluid : CellClass::Solid);
    for (int a = snout_cells + wall + interior_depth; a < axial_total; ++a)
        for (int l = -half_base; l <= half_base; ++l) paint(l, a, CellClass::Solid);

    const int grille_a = snout_cells + wall - 1;  // innermost front-wall layer

    // inhale channels: carve through pyramid + front wall, grille on top
    const PortSpan in_span = port_span(geom.nostril_spacing / 2.0, geom.inhale_diameter, h);
    if (in_span.lo < 1)
        throw_sim_error(ErrorCode::ResolutionTooCoarse, "inhale channels merge on this grid");
    PortGroup in_right{CellClass::InhalePort, {}, {0, 0}, +1};
    PortGroup in_left{CellClass::InhalePort, {}, {0, 0}, -1};
    for (int k = 0; k < in_span.n; ++k) {
        for (int sgn : {+1, -1}) {
            const int l = sgn * (in_span.lo + k);
            for (int a = a_surface(l); a < grille_a; ++a) paint(l, a, CellClass::Fluid);
            paint(l, grille_a, CellClass::InhalePort);
            int i, j;
            fr.to_grid(l, grille_a, i, j);
            (sgn > 0 ? in_right : in_left).cells.push_back(m.idx(i, j));
        }
    }

    // exhale ports: surface cells on the pyramid faces, outboard of the channels
    const double exhale_offset = geom.nostril_spacing / 2.0 + geom.inhale_diameter / 2.0 +
                                 std::max(h, 0.001) + geom.exhale_diameter / 2.0;
    const PortSpan ex_span = port_span(exhale_offset, geom.exhale_diameter, h);
    if (ex_span.lo <= in_span.lo + in_span.n - 1)
        throw_sim_error(ErrorCode::ResolutionTooCoarse, "exhale ports overlap the inhale channels");
    if (ex_span.lo + ex_span.n - 1 >= half_base)
        throw_sim_error(ErrorCode::DomainTooSmall, "exhale ports fall off the snout face");
    PortGroup ex_right{CellClass::ExhalePort, {}, {0, 0}, +1};
    PortGroup ex_left{CellClass::ExhalePort, {}, {0, 0}, -1};
    for (int k = 0; k < ex_span.n; ++k) {
        for (int sgn : {+1, -1}) {
            const int l = sgn * (ex_span.lo + k);
            const int a = a_surface(l);
            paint(l, a, CellClass::ExhalePort);
            int i, j;
            fr.to_grid(l, a, i, j);
            (sgn > 0 ? ex_right : ex_left).cells.push_back(m.idx(i, j));
        }
    }

    // tube outlet: innermost back-wall layer, offset to one side, sized to the
    // total inhale port area so the balancing outflow matches the jet speed
    const int tube_a = snout_cells + wall + interior_depth;
    int n_tube = 2 * in_span.n;
    const int tube_lo = 2;
    n_tube = std::min(n_tube, interior_half - tube_lo + 1);
    if (n_tube < 1) throw_sim_error(ErrorCode::ResolutionTooCoarse, "no room for the tube outlet");
    PortGroup tube{CellClass::TubeOutlet, {}, {0, 0}, 0};
    for (int k = 0; k < n_tube; ++k) {
        const int l = tube_lo + k;
        paint(l, tube_a, CellClass::TubeOutlet);
        int i, j;
        fr.to_grid(l, tube_a, i, j);
        tube.cells.push_back(m.idx(i, j));
    }

    // jet directions
    const Vec2 fwd = m.forward;
    const Vec2 lat = (pose.orientation == Orientation::FaceDown) ? Vec2{1.0, 0.0} : Vec2{0.0, 1.0};
    const double ca = std::cos(geom.exhale_angle), sa = std::sin(geom.exhale_angle);
    in_right.jet_dir = in_left.jet_dir = {-fwd.x, -fwd.y};
    tube.jet_dir = {-fwd.x, -fwd.y};
    ex_right.jet_dir = {lat.x * ca + fwd.x * sa, lat.y * ca + fwd.y * sa};
    ex_left.jet_dir = {-lat.x * ca + fwd.x * sa, -lat.y * ca + fwd.y * sa};

    m.groups = {in_left, in_right, ex_left, ex_right, tube};
    m.n_inhale_cells = static_cast<int>(in_left.cells.size() + in_right.cells.size());
    m.n_tube_cells = static_cast<int>(tube.cells.size());
    m.tube_area_ratio = static_cast<double>(m.n_inhale_cells) / m.n_tube_cells;

    // prescribed faces
    std::set<std::tuple<int, int, int>> seen;
    auto add_face = [&](FaceComp comp, int i, int j, FaceRole role, double scale) {
        if (seen.insert({comp == FaceComp::U ? 0 : 1, i, j}).second)
            m.faces.push_back({comp, i, j, role, scale});
    };
    auto cell_is = [&](int i, int j, CellClass c) { return m.inside(i, j) && m.at(i, j) == c; };

    for (const PortGroup& g : m.groups) {
        const FaceRole role = g.kind == CellClass::InhalePort  ? FaceRole::InhaleJet
                              : g.kind == CellClass::ExhalePort ? FaceRole::ExhaleJet
                                                                : FaceRole::TubeOut;
        for (int cell : g.cells) {
            const int i = cell % m.nx, j = cell / m.nx;
            if (g.kind == CellClass::InhalePort) {
                // plug flow along the axis through both axis-normal faces
                if (pose.orientation == Orientation::FaceDown) {
                    add_face(FaceComp::V, i, j, role, g.jet_dir.y);
                    add_face(FaceComp::V, i, j + 1, role, g.jet_dir.y);
                    add_face(FaceComp::U, i, j, FaceRole::PlugZero, 0.0);
                    add_face(FaceComp::U, i + 1, j, FaceRole::PlugZero, 0.0);
                } else {
                    add_face(FaceComp::U, i, j, role, g.jet_dir.x);
                    add_face(FaceComp::U, i + 1, j, role, g.jet_dir.x);
                    add_face(FaceComp::V, i, j, FaceRole::PlugZero, 0.0);
                    add_face(FaceComp::V, i, j + 1, FaceRole::PlugZero, 0.0);
                }
            } else if (g.kind == CellClass::ExhalePort) {
                // every fluid-adjacent face carries its jet component
                if (cell_is(i - 1, j, CellClass::Fluid)) add_face(FaceComp::U, i, j, role, g.jet_dir.x);
                if (cell_is(i + 1, j, CellClass::Fluid)) add_face(FaceComp::U, i + 1, j, role, g.jet_dir.x);
                if (cell_is(i, j - 1, CellClass::Fluid)) add_face(FaceComp::V, i, j, role, g.jet_dir.y);
                if (cell_is(i, j + 1, CellClass::Fluid)) add_face(FaceComp::V, i, j + 1, role, g.jet_dir.y);
            } else {
                // tube draws from the chamber through its interior-facing face
                if (pose.orientation == Orientation::FaceDown) {
                    add_face(FaceComp::V, i, j, role, -m.forward.y);  // chamber below
                    add_face(FaceComp::U, i, j, FaceRole::PlugZero, 0.0);
                    add_face(FaceComp::U, i + 1, j, FaceRole::PlugZero, 0.0);
                } else {
                    add_face(FaceComp::U, i + 1, j, role, -m.forward.x);  // chamber on +x side
                    add_face(FaceComp::V, i, j, FaceRole::PlugZero, 0.0);
                    add_face(FaceComp::V, i, j + 1, FaceRole::PlugZero, 0.0);
                }
            }
        }
    }

    // port cells must see fluid
    for (const PortGroup& g : m.groups) {
        if (g.kind == CellClass::TubeOutlet) continue;
        for (int cell : g.cells) {
            const int i = cell % m.nx, j = cell / m.nx;
            const bool ok = cell_is(i - 1, j, CellClass::Fluid) || cell_is(i + 1, j, CellClass::Fluid) ||
                            cell_is(i, j - 1, CellClass::Fluid) || cell_is(i, j + 1, CellClass::Fluid) ||
                            (g.kind == CellClass::InhalePort);  // grille borders chamber + channel
            if (!ok) throw_sim_error(ErrorCode::PortBlocked, "port cell has no adjacent fluid");
        }
    }
    // grille faces chamber fluid on the inside and channel fluid outside
    for (const PortGroup& g : m.groups) {
        if (g.kind != CellClass::InhalePort) continue;
        for (int cell : g.cells) {
            const int i = cell % m.nx, j = cell / m.nx;
            const int di = static_cast<int>(-m.forward.x), dj = static_cast<int>(-m.forward.y);
            if (!cell_is(i + di, j + dj, CellClass::Fluid) || !cell_is(i - di, j - dj, CellClass::Fluid))
                throw_sim_error(ErrorCode::PortBlocked, "inhale channel blocked");
        }
    }

    // chamber interior cells
    for (int a = snout_cells + wall; a < snout_cells + wall + interior_depth; ++a)
        for (int l = -interior_half; l <= interior_half; ++l) {
            int i, j;
            fr.to_grid(l, a, i, j);
            if (m.is_fluid(i, j)) m.chamber_cells.push_back(m.idx(i, j));
        }
    std::sort(m.chamber_cells.begin(), m.chamber_cells.end());

    // physical anchors
    if (pose.orientation == Orientation::FaceDown) {
        const double x_ax = (fr.axis + 0.5) * h;
        m.snout_tip = {x_ax, fr.tip * h};
        m.module_top = {x_ax, (fr.tip + axial_total) * h};
    } else {
        const double y_ax = (fr.axis + 0.5) * h;
        m.snout_tip = {(fr.tip + 1) * h, y_ax};
        m.module_top = {(fr.tip + 1 - axial_total) * h, y_ax};
    }

    return m;
}

GridMask build_scene(const SamplerGeometry& geom, const ScenePose& pose, const DomainSpec& domain,
                     const SourceSpec& src) {
    GridMask m = build_scene(geom, pose, domain);
    src.validate();
    m.source_cells(src);  // throws if the source does not fit
    return m;
}

Vec2 GridMask::source_center(const SourceSpec& src) const {
    // FaceDown: offset above the module top; Horizontal90: in front of the tip
    if (orientation == Orientation::FaceDown) return {module_top.x, module_top.y + src.offset};
    return {snout_tip.x + src.offset, snout_tip.y};
}

std::vector<int> GridMask::source_cells(const SourceSpec& src) const {
    const Vec2 c = source_center(src);
    std::vector<int> cells;
    const int i0 = static_cast<int>(std::floor((c.x - src.radius) / h));
    const int i1 = static_cast<int>(std::floor((c.x + src.radius) / h));
    const int j0 = static_cast<int>(std::floor((c.y - src.radius) / h));
    const int j1 = static_cast<int>(std::floor((c.y + src.radius) / h));
    for (int j = j0; j <= j1; ++j)
        for (int i = i0; i <= i1; ++i) {
            const double dx = (i + 0.5) * h - c.x, dy = (j + 0.5) * h - c.y;
            if (dx * dx + dy * dy > src.radius * src.radius) continue;
            if (!inside(i, j) || !is_fluid(i, j))
                throw_sim_error(ErrorCode::DomainTooSmall, "source disc falls outside the fluid domain");
            cells.push_back(idx(i, j));
        }
    if (cells.empty()) {
        const int ic = static_cast<int>(std::floor(c.x / h)), jc = static_cast<int>(std::floor(c.y / h));
        if (!inside(ic, jc) || !is_fluid(ic, jc))
            throw_sim_error(ErrorCode::DomainTooSmall, "source center falls outside the fluid domain");
        cells.push_back(idx(ic, jc));
    }
    return cells;
}

std::vector<int> GridMask::sensor_region_cells(double depth, double width) const {
    const int d = std::max(1, static_cast<int>(std::llround(depth / h)));
    int hw = interior_half;
    if (width > 0) hw = std::min(interior_half, static_cast<int>(std::llround((width / h - 1.0) / 2.0)));
    std::vector<int> cells;
    const int a_hi = snout_cells + wall_cells + interior_depth_cells - 1;
    const int a_lo = std::max(snout_cells + wall_cells, a_hi - d + 1);
    Frame fr{orientation, axis_index,
             orientation == Orientation::FaceDown
                 ? static_cast<int>(std::llround(snout_tip.y / h))
                 : static_cast<int>(std::llround(snout_tip.x / h)) - 1};
    for (int a = a_lo; a <= a_hi; ++a)
        for (int l = -hw; l <= hw; ++l) {
            int i, j;
            fr.to_grid(l, a, i, j);
            if (inside(i, j) && is_fluid(i, j)) cells.push_back(idx(i, j));
        }
    std::sort(cells.begin(), cells.end());
    return cells;
}

bool mirror_check(const GridMask& mask) {
    auto fold = [](CellClass c) { return c == CellClass::TubeOutlet ? CellClass::Solid : c; };
    for (int j = 0; j < mask.ny; ++j)
        for (int i = 0; i < mask.nx; ++i) {
            const int id = mask.idx(i, j);
            if (!mask.sampler[static_cast<size_t>(id)]) continue;
            int im = i, jm = j;
            if (mask.orientation == Orientation::FaceDown)
                im = 2 * mask.axis_index - i;
            else
                jm = 2 * mask.axis_index - j;
            if (!mask.inside(im, jm)) return false;
            const int idm = mask.idx(im, jm);
            if (!mask.sampler[static_cast<size_t>(idm)]) return false;
            if (fold(mask.cls[static_cast<size_t>(id)]) != fold(mask.cls[static_cast<size_t>(idm)])) return false;
        }
    return true;
}

}  // namespace dognose
