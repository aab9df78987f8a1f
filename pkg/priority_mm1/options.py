class ResourceOptions:
    """
    The inner Meta class allows for class-level configuration of how the
    Resource should behave. The following options are available:
    """

    name = None
    """
    Label of the exported table, used as the dataset title and as the section
    heading of the text format.
    """

    fields = None
    """
    Controls what declared fields the Resource should include. A whitelist
    of fields.
    """

    exclude = None
    """
    Controls what declared fields the Resource should
    NOT include. A blacklist of fields.
    """

    export_order = None
    """
    Controls export order for columns.
    """

    widgets = None
    """
    This dictionary defines widget kwargs for fields, e.g.
    ``{"L1": {"digits": 12}}``.
    """

    diagnostics = None
    """
    Field names that the JSON format moves out of ``metrics`` into the
    ``diagnostics`` section. Tabular formats keep them as ordinary columns.
    """

    json_key = None
    """
    Field name whose value keys the rows of the JSON ``metrics`` section.
    ``None`` renders a single object as a mapping and several objects as a
    list of mappings.
    """
