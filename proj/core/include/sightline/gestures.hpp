#pragma once

#include <array>
#include <iosfwd>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sightline/scene.hpp"

namespace sightline {

enum class Hand { Left, Right };
enum class GestureStatus { Point, Open, Close, None };

std::string_view hand_name(Hand hand);
Hand hand_from_name(std::string_view name);
std::string_view gesture_status_name(GestureStatus status);
GestureStatus gesture_status_from_name(std::string_view name);

/// One timestamped hand observation.
struct GestureFrame {
    double time = 0.0;  // seconds
    Hand hand = Hand::Left;
    GestureStatus status = GestureStatus::None;
    Point3 position;
    Vec3 orientation{0.0, 0.0, 1.0};  // palm normal, unit length when tracked
};

struct Manipulation {
    enum class Kind { Translate, Rotate, Scale, NoOp };

    Kind kind = Kind::NoOp;
    Vec3 translation;            // Translate
    double rotation_angle = 0.0;  // Rotate, signed, about the vertical axis
    Vec3 scale_factors{1.0, 1.0, 1.0};  // Scale, per world axis
    double theta1 = 0.0;  // diagnostic: hand motion divergence angle
    double theta2 = 0.0;  // diagnostic: inter-hand vector rotation angle
};

std::string_view manipulation_kind_name(Manipulation::Kind kind);

/// Two-hand decision tree: theta1 < pi/6 -> Translate; else theta2 > pi/12 ->
/// Rotate about the vertical axis; else Scale. Statuses must be four Close
/// (manipulation) or four Open (navigation); both hands at rest -> NoOp.
Manipulation classify_pair(const GestureFrame& left_t0, const GestureFrame& right_t0,
                           const GestureFrame& left_t1, const GestureFrame& right_t1);

struct SceneObject {
    std::string id;
    Point3 position;
};

/// Nearest object within the threshold; exact ties pick the smaller id.
std::optional<std::string> select_object(const GestureFrame& point_frame,
                                         std::span<const SceneObject> objects,
                                         double threshold);

/// True iff every orientation in the window stays within the threshold angle
/// of the first one.
bool orientation_stable(std::span<const GestureFrame> window, double threshold_rad);

/// Applies a manipulation to a candidate building about its centroid.
Building apply_manipulation(const Building& building, const Manipulation& manipulation);

struct GestureConfig {
    double selection_threshold = 0.5;                 // meters
    double stability_threshold = 15.0 * std::numbers::pi / 180.0;  // radians
    double confirm_window = 1.0;  // seconds between Point and the confirming Open
    int arm_frames = 100;         // consecutive two-hand frames before InitialBar
};

struct GestureEvent {
    enum class Type {
        Highlight,
        Select,
        Manipulation,
        Navigation,
        InitialBar,
        MovedBar,
        Released,
    };

    Type type;
    double time = 0.0;
    std::string object_id;             // Highlight / Select
    sightline::Manipulation action;    // Manipulation / Navigation payload
    std::array<Point3, 2> endpoints{};  // handle-bar events: left, right
    std::array<Point3, 2> connector{};  // Translate MovedBar: bar midpoints
    bool has_connector = false;
};

/// Replay state machine over an interleaved two-hand frame stream. Frames per
/// hand must be time-ordered; malformed frames are skipped and counted.
class GestureSession {
  public:
    GestureSession(std::vector<SceneObject> objects, GestureConfig config);

    /// Feeds one frame; returns the events it triggered.
    std::vector<GestureEvent> push(const GestureFrame& frame);

    /// Flushes pending state (emits Released when a bar is still armed).
    std::vector<GestureEvent> finish();

    int skipped_frames() const { return skipped_; }

  private:
    struct HandState {
        bool seen = false;
        GestureFrame frame;
        double last_time = -std::numeric_limits<double>::infinity();
    };

    std::vector<GestureEvent> process_tick(double time);

    std::vector<SceneObject> objects_;
    GestureConfig config_;
    HandState left_, right_;
    double pending_tick_time_ = -std::numeric_limits<double>::infinity();
    bool tick_dirty_ = false;

    int consecutive_ = 0;
    GestureStatus armed_kind_ = GestureStatus::None;  // Open/Close once armed
    bool armed_ = false;
    GestureFrame bar_left_, bar_right_;  // gestures at the InitialBar
    Vec3 prev_left_orientation_, prev_right_orientation_;

    std::optional<std::string> highlighted_;
    Hand point_hand_ = Hand::Left;
    double point_time_ = -std::numeric_limits<double>::infinity();
    bool point_active_ = false;

    int skipped_ = 0;
};

/// Convenience wrapper: run a whole stream through a session.
std::vector<GestureEvent> ingest(std::span<const GestureFrame> frames,
                                 std::span<const SceneObject> objects,
                                 const GestureConfig& config = {});

/// Newline-delimited JSON records {t, hand, status, p, o}.
std::vector<GestureFrame> load_trace(const std::string& path);
void write_events_ndjson(std::span<const GestureEvent> events, std::ostream& out);

}  // namespace sightline
