"""Scott rank constructions: ordinals, thin trees, group structures on tree levels, back-and-forth."""
