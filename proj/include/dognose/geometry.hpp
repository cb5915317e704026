#pragma once

#include <cstdint>
#include <vector>

#include "dognose/common.hpp"

namespace dognose {

// Physical dimensions of the sampler. chamber_width/depth are interior
// dimensions; walls are added during rasterization. exhale_angle is measured
// below the horizontal of the snout frame, jets pointing outward.
struct SamplerGeometry {
    double snout_height = 0.0127;
    double nostril_spacing = 0.01932;
    double inhale_diameter = 0.008;
    double exhale_diameter = 0.0055;
    double exhale_angle = kPi / 4.0;
    double chamber_width = 0.05;
    double chamber_depth = 0.04;

    void validate() const;
};

enum class Orientation : uint8_t { FaceDown, Horizontal90 };

// FaceDown: snout points at the ground, elevation is the tip-to-ground gap.
// Horizontal90: sampler rests on the ground, snout axis horizontal.
struct ScenePose {
    Orientation orientation = Orientation::FaceDown;
    double elevation = 0.0;

    void validate() const;
};

// Tracer emitter: a small disc `offset` metres from the module along the
// snout axis (FaceDown: above the module top; Horizontal90: in front of the
// snout), active from start_time on.
struct SourceSpec {
    double offset = 0.127;
    double emission_rate = 0.0;  // ug/s
    double start_time = 0.0;     // s
    double radius = 0.002;       // m

    void validate() const;
};

enum class BoundaryClass : uint8_t { Solid, Open };

struct DomainSpec {
    double width = 0.25;
    double height = 0.25;
    double cell_size = 0.25 / 128.0;
    BoundaryClass left = BoundaryClass::Open;
    BoundaryClass right = BoundaryClass::Open;
    BoundaryClass top = BoundaryClass::Open;
    BoundaryClass bottom = BoundaryClass::Solid;

    int nx() const;
    int ny() const;
    void validate() const;
};

enum class CellClass : uint8_t { Fluid = 0, Solid, InhalePort, ExhalePort, TubeOutlet };

struct PortGroup {
    CellClass kind = CellClass::InhalePort;
    std::vector<int> cells;  // flat cell indices
    Vec2 jet_dir;            // unit vector (into the chamber for inhale/tube)
    int side = 0;            // -1 / +1 relative to the snout axis, 0 = offset tube
};

enum class FaceComp : uint8_t { U, V };
enum class FaceRole : uint8_t { InhaleJet, ExhaleJet, TubeOut, PlugZero };

// A velocity face with an imposed value: value = speed(role) * scale, where
// scale is the jet direction component normal to the face.
struct PrescribedFace {
    FaceComp comp = FaceComp::U;
    int i = 0;
    int j = 0;
    FaceRole role = FaceRole::PlugZero;
    double scale = 0.0;
};

// Rasterized scene: cell classes plus everything derived from them that the
// solvers need (port groups, prescribed faces, chamber cells, mirror axis).
struct GridMask {
    int nx = 0;
    int ny = 0;
    double h = 0.0;
    Orientation orientation = Orientation::FaceDown;

    std::vector<CellClass> cls;
    std::vector<uint8_t> sampler;  // cell belongs to the sampler body region

    std::vector<PortGroup> groups;
    std::vector<PrescribedFace> faces;
    int n_inhale_cells = 0;
    int n_tube_cells = 0;
    double tube_area_ratio = 1.0;  // inhale cells / tube cells

    std::vector<int> chamber_cells;

    // Mirror axis through cell centers: column index (FaceDown) or row index
    // (Horizontal90).
    int axis_index = 0;

    Vec2 snout_tip;   // tip face center, physical
    Vec2 module_top;  // back face center, physical
    Vec2 forward;     // unit vector out of the snout

    // local frame extents (cells), kept for sensor placement and tests
    int snout_cells = 0;
    int wall_cells = 0;
    int interior_depth_cells = 0;
    int interior_half = 0;
    int half_base = 0;

    int idx(int i, int j) const { return j * nx + i; }
    bool inside(int i, int j) const { return i >= 0 && i < nx && j >= 0 && j < ny; }
    CellClass at(int i, int j) const { return cls[static_cast<size_t>(idx(i, j))]; }
    bool is_fluid(int i, int j) const { return at(i, j) == CellClass::Fluid; }

    Vec2 source_center(const SourceSpec& src) const;
    // Disc cells for a source; throws DomainTooSmall if any lies outside the
    // domain or on a non-fluid cell.
    std::vector<int> source_cells(const SourceSpec& src) const;
    // Cells of the sensing region: a rectangle hugging the chamber back wall,
    // `depth` deep along the axis; width 0 selects the full interior width.
    std::vector<int> sensor_region_cells(double depth, double width) const;
};

GridMask build_scene(const SamplerGeometry& geom, const ScenePose& pose, const DomainSpec& domain);
GridMask build_scene(const SamplerGeometry& geom, const ScenePose& pose, const DomainSpec& domain,
                     const SourceSpec& src);

// True iff sampler cell classes are symmetric about the snout axis
// (TubeOutlet counts as wall; it is deliberately offset to one side).
bool mirror_check(const GridMask& mask);

}  // namespace dognose
