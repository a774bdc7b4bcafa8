"""The three reference policies, on two synthetic clips.

Policy "previous" compares each frame's candidates against the mask
chosen one frame earlier, "first" always compares against the frame-0
choice, and "adaptive" starts like "first" but asks for a new selection
whenever the best IoU drops below a threshold (and can refresh its
reference every N frames).
"""

from maskflow import ReselectionRequired, TrackingPolicy, track
from maskflow.synthetic import scene_cut_scenario, translating_square_scenario


def show(name, trace):
    chosen = [e.chosen_index for e in trace.entries]
    ious = " ".join(f"{e.iou:.2f}" for e in trace.entries)
    print(f"{name:<10} chose {chosen}")
    print(f"{'':<10} iou-to-reference per frame: {ious}")
    for ev in trace.events:
        print(f"{'':<10} event: frame {ev.frame} {ev.kind}")


# A square drifting one pixel per frame. The drift keeps neighbors
# overlapping heavily, so comparing against the previous frame holds on;
# comparing against frame 0 decays as the object walks away.
moving = translating_square_scenario(n_frames=16)
print(f"translating square, true slots: {list(moving.gt_indices)}")
start = moving.gt_indices[0]

show("previous", track(moving.per_frame, TrackingPolicy.previous_frame(), start))
show("first", track(moving.per_frame, TrackingPolicy.first_frame(), start))
print()

# A hard cut at frame 5: every candidate is disjoint from the reference.
# The adaptive policy refuses to guess: in "fail" mode it stops and names
# the frame; a resolver (here: a stand-in for the human) supplies the
# answer and tracking continues with the new reference.
cut = scene_cut_scenario(n_frames=8, cut=5)
adaptive = TrackingPolicy.adaptive(tau=0.5)

try:
    track(cut.per_frame, adaptive, 0, on_reselect="fail")
except ReselectionRequired as stop:
    print(f"scene cut: tracking blocked at frame {stop.frame} "
          f"({len(stop.partial.entries)} frames already traced)")

show("resolved", track(cut.per_frame, adaptive, 0, on_reselect=lambda f, c, r: 1))
show("auto", track(cut.per_frame, adaptive, 0, on_reselect="auto"))
