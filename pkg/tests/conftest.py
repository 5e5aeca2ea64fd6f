from hypothesis import settings

# Every example runs dense linear algebra: fewer examples and no deadline
settings.register_profile("default", max_examples=30, deadline=None)
