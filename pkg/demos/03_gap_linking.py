"""Bridge a multi-frame dropout by linking tubelets and interpolating.

One object crosses the frame; its detections vanish for five consecutive
frames (an occlusion, say). Frame-level linking necessarily produces two
tubelets. Tubelet-level linking scores the end of the first against the
start of the second -- per-frame motion, not total motion -- and fills the
gap with linearly interpolated boxes carrying the averaged confidence.
"""

from tubelink import (
    BBox,
    Detection,
    FrameShape,
    VideoDetections,
    build_tubelets,
    default_model,
    link_tubelets,
    tubelet_gap,
    tubelet_link_score,
)

shape = FrameShape(1280, 720)
frames, gap_start, gap_len = 40, 18, 5

frame_map = {}
for f in range(frames):
    if gap_start <= f < gap_start + gap_len:
        frame_map[f] = []  # occluded
    else:
        frame_map[f] = [Detection(f, 0, BBox(80 + 6.0 * f, 200 + 1.5 * f, 48, 48), 0.82)]
stream = VideoDetections("occlusion", shape, frames, frame_map)

model = default_model()
fragments = build_tubelets(stream, model)
print(f"fragments after frame-level linking: {len(fragments)}")
for t in fragments:
    print(f"  tubelet {t.tubelet_id}: frames {t.start_frame}-{t.end_frame}")

a, b = fragments
print(f"\ngap between fragments: {tubelet_gap(a, b)} frames")
print(f"link score (object moves 6 px/frame): {tubelet_link_score(a, b, model, shape):.4f}")

for g_max in (3, 5, 10):
    merged = link_tubelets(fragments, model, g_max=g_max, tau_tub=0.5, shape=shape)
    print(f"g_max={g_max:2d}: {len(merged)} tubelet(s)")

merged = link_tubelets(fragments, model, g_max=10, tau_tub=0.5, shape=shape)[0]
print("\ninterpolated frames:")
for e in merged.entries:
    if e.interpolated:
        cx = e.bbox.x + e.bbox.w / 2
        print(f"  frame {e.frame_idx}: center x {cx:7.2f}, score {e.score:.3f}")
print("the synthesized confidences are the average of the two fragments' means")
