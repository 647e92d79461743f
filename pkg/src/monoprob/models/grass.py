"""Rain / sprinkler / wet grass network, queried for rain given wet grass."""
from ..core import fail
from ..stdlib import flip, letlazy


def grass_model():
    def with_cloudy(cloudy):
        return flip(0.8 if cloudy else 0.2).bind(
            lambda rain: flip(0.1 if cloudy else 0.5).bind(
                lambda sprinkler: with_rain(rain, sprinkler)))

    def with_rain(rain, sprinkler):
        # wet_roof is drawn but never used
        return flip(0.7).bind(lambda roof: wet_grass(rain, sprinkler))

    def wet_grass(rain, sprinkler):
        def second(f1):
            if f1 and rain:
                return True
            return flip(0.9).map(lambda f2: f2 and sprinkler)

        return flip(0.9).bind(second).bind(
            lambda wet: rain if wet else fail())

    return flip(0.5).bind(with_cloudy)


def grass_model_lazy():
    cloudy = letlazy(lambda: flip(0.5))
    rain = letlazy(lambda: cloudy().bind(lambda c: flip(0.8 if c else 0.2)))
    sprinkler = letlazy(lambda: cloudy().bind(lambda c: flip(0.1 if c else 0.5)))
    wet_roof = letlazy(lambda: flip(0.7).bind(lambda f: rain() if f else False))  # noqa: F841

    def wet_grass():
        def second():
            return flip(0.9).bind(lambda f: sprinkler() if f else False)

        return flip(0.9).bind(
            lambda f: rain().bind(lambda r: True if r else second()) if f else second())

    wet = letlazy(wet_grass)
    return wet().bind(lambda w: rain() if w else fail())
