from functools import wraps

from horolab import utils

# NOTE:
# @experiment must be the outermost decorator; it registers the function object it
# receives, and @cached / @uncached mark that object.
#
# i.e:
#
# @experiment("remez")
# @uncached
# def remez(config)
#   ...

# kind -> experiment function
registry = {}


def experiment(kind):
    """
    Register a function as the runner for one experiment kind. The function takes a
    validated ExperimentConfig and returns an ExperimentOutcome.
    """

    def _experiment(func):
        @wraps(func)
        def wrapped_experiment(*args, **kwargs):
            return func(*args, **kwargs)

        wrapped_experiment.horolab_kind = kind
        registry[kind] = wrapped_experiment
        return wrapped_experiment

    return _experiment


def cached(*args, cache_name=None):
    """
    Serve repeated configs from report storage. Allows a cache name so that different
    cache settings can be used per experiment.
    :param args: optional arguments. This holds the function when no cache name is given
    :param cache_name: The name of the cache to use from the settings file under CACHES
    :return: wrapped function
    """

    def _cached(func):
        @wraps(func)
        def wrapped_experiment(*args, **kwargs):
            return func(*args, **kwargs)

        wrapped_experiment.horolab_cached = True
        if cache_name:
            wrapped_experiment.horolab_cache_name = cache_name
            utils.get_storage_class().validate_storage(cache_name)

        return wrapped_experiment

    if len(args) > 0 and callable(args[0]):
        return _cached(args[0])

    return _cached


def uncached(func):
    """
    Always recompute; never read or write report storage.
    """

    def wrapped_experiment(*args, **kwargs):
        return func(*args, **kwargs)

    wrapped_experiment.horolab_uncached = True
    return wraps(func)(wrapped_experiment)
