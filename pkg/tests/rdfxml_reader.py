"""Independent RDF/XML reader used only to verify serializer output.

Built on xml.dom.minidom so it shares no code with the serializer under test.
"""

from xml.dom import minidom

from epikg.rdf import Graph, Triple, iri, literal

RDF_NS = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
XML_NS = "http://www.w3.org/XML/1998/namespace"


def _text(node) -> str:
    return "".join(child.data for child in node.childNodes
                   if child.nodeType in (node.TEXT_NODE, node.CDATA_SECTION_NODE))


def read_rdfxml(text: str, name: str = "") -> Graph:
    doc = minidom.parseString(text)
    root = doc.documentElement
    assert root.namespaceURI == RDF_NS and root.localName == "RDF"
    graph = Graph(name=name)
    for node in root.childNodes:
        if node.nodeType != node.ELEMENT_NODE:
            continue
        about = node.getAttributeNS(RDF_NS, "about") or node.getAttribute("rdf:about")
        subject = iri(about)
        if not (node.namespaceURI == RDF_NS and node.localName == "Description"):
            graph.add(Triple(subject, iri(RDF_NS + "type"),
                             iri(node.namespaceURI + node.localName)))
        for prop in node.childNodes:
            if prop.nodeType != prop.ELEMENT_NODE:
                continue
            predicate = iri(prop.namespaceURI + prop.localName)
            resource = (prop.getAttributeNS(RDF_NS, "resource")
                        or prop.getAttribute("rdf:resource"))
            if resource:
                obj = iri(resource)
            else:
                datatype = (prop.getAttributeNS(RDF_NS, "datatype")
                            or prop.getAttribute("rdf:datatype")) or None
                lang = (prop.getAttributeNS(XML_NS, "lang")
                        or prop.getAttribute("xml:lang")) or None
                obj = literal(_text(prop), datatype=datatype, language=lang)
            graph.add(Triple(subject, predicate, obj))
    return graph
