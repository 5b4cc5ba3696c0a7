"""Bot-activity analytics around a tracked topic.

Ingests a topic-filtered tweet stream and a random baseline stream, scores
accounts for likely automation through an external scoring service, computes
the daily bot-volume index (BEV) and its variants, ranks the entities
amplified by likely bots, and serves the results over HTTP.
"""

__version__ = "0.1.0"
