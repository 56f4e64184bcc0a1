import hypothesis

# Property tests should be reproducible in CI and not flake on slow boxes.
hypothesis.settings.register_profile(
    "ci",
    deadline=None,
    max_examples=50,
    derandomize=True,
)
hypothesis.settings.load_profile("ci")
