def normalize_key(key):
    return key.strip().replace("-", "_")


def read_config(path):
    """
    Reads `key = value` lines; '#' starts a comment, blank lines are skipped
    :param path: config file
    :return: dictionary of key -> string value, keys with dashes turned into underscores
    """
    config = {}
    with open(path) as fp:
        for lineno, line in enumerate(fp, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError("File: %s line %d is not a key = value pair" % (path, lineno))
            key, value = line.split("=", 1)
            config[normalize_key(key)] = value.strip()
    return config


def write_config(path, params, header=None):
    with open(path, "w") as fp:
        if header is not None:
            fp.write("# %s\n" % header)
        for key in sorted(params):
            fp.write("%s = %s\n" % (key, params[key]))
    return True
